//! Krein-space structure: fundamental symmetries, the indefinite adjoint,
//! fundamental decompositions, and real-linear (linear or anti-linear)
//! operators on C^n.
//!
//! Anti-linear maps are stored relative to the canonical entrywise
//! conjugation: `(M, -1)` acts as `v -> M conj(v)`. All composition and
//! adjoint rules below are stated in that convention, so they stay
//! basis-consistent as long as every operator in play uses it.

use thiserror::Error;

use crate::numkit::{c64, herm_eig, ComplexMatrix, NumError};

#[derive(Debug, Error)]
pub enum KreinError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} is unavailable: {1}")]
    Unavailable(&'static str, String),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Verdict of a residual-based check: the boolean alone is never enough to
/// audit a tolerance choice, so the measured residual always rides along.
#[derive(Debug, Clone, Copy)]
pub struct Verdict {
    pub ok: bool,
    pub residual: f64,
}

/// A fundamental symmetry `eta` (Hermitian involution) together with its
/// signature: `kappa_plus` positive eigenvalues, `kappa_minus` negative ones.
#[derive(Debug, Clone)]
pub struct KreinMetric {
    eta: ComplexMatrix,
    kappa_plus: usize,
    kappa_minus: usize,
}

impl KreinMetric {
    /// Validates that `eta` is Hermitian and squares to the identity within
    /// `tol * max(1, ||eta||)`, then counts the signature.
    pub fn new(eta: ComplexMatrix, tol: f64) -> Result<KreinMetric, KreinError> {
        let scale = eta.norm_fro().max(1.0);
        let hres = eta.herm_residual();
        if hres > tol * scale {
            return Err(NumError::NotHermitian { residual: hres, allowed: tol * scale }.into());
        }
        let ires = (&(&eta * &eta) - &ComplexMatrix::identity(eta.dim())).norm_fro();
        if ires > tol * scale * scale {
            return Err(KreinError::Unavailable(
                "fundamental symmetry",
                format!("eta^2 differs from identity by {ires:.3e}"),
            ));
        }
        let eig = herm_eig(&eta, tol)?;
        let kappa_plus = eig.values.iter().filter(|x| **x > 0.0).count();
        let kappa_minus = eta.dim() - kappa_plus;
        Ok(KreinMetric { eta, kappa_plus, kappa_minus })
    }

    /// `diag(+1 x p, -1 x m)`.
    pub fn standard(p: usize, m: usize) -> KreinMetric {
        let mut eta = ComplexMatrix::identity(p + m);
        for i in p..p + m {
            eta[(i, i)] = c64::new(-1.0, 0.0);
        }
        KreinMetric { eta, kappa_plus: p, kappa_minus: m }
    }

    pub fn eta(&self) -> &ComplexMatrix {
        &self.eta
    }

    pub fn dim(&self) -> usize {
        self.eta.dim()
    }

    pub fn kappa_plus(&self) -> usize {
        self.kappa_plus
    }

    pub fn kappa_minus(&self) -> usize {
        self.kappa_minus
    }

    /// Rank of indefiniteness, `min(kappa_plus, kappa_minus)`.
    pub fn kappa(&self) -> usize {
        self.kappa_plus.min(self.kappa_minus)
    }

    /// Indefinite inner product `<x, eta y>` (conjugate-linear in `x`).
    pub fn product(&self, x: &[c64], y: &[c64]) -> c64 {
        let ey = self.eta.apply(y);
        x.iter().zip(&ey).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Linear (`varpi = +1`) or anti-linear (`varpi = -1`) operator on C^n.
#[derive(Debug, Clone)]
pub struct RealLinearOp {
    pub mat: ComplexMatrix,
    pub varpi: i8,
}

impl RealLinearOp {
    pub fn linear(mat: ComplexMatrix) -> RealLinearOp {
        RealLinearOp { mat, varpi: 1 }
    }

    pub fn antilinear(mat: ComplexMatrix) -> RealLinearOp {
        RealLinearOp { mat, varpi: -1 }
    }

    pub fn identity(n: usize) -> RealLinearOp {
        RealLinearOp::linear(ComplexMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn apply(&self, v: &[c64]) -> Vec<c64> {
        if self.varpi == 1 {
            self.mat.apply(v)
        } else {
            let cv: Vec<c64> = v.iter().map(|z| z.conj()).collect();
            self.mat.apply(&cv)
        }
    }

    /// Adjoint for `<x, Ay> = <A* x, y>`: `(M, +1)* = (M*, +1)` and
    /// `(M, -1)* = (M^T, -1)`.
    pub fn adjoint(&self) -> RealLinearOp {
        if self.varpi == 1 {
            RealLinearOp::linear(self.mat.adjoint())
        } else {
            RealLinearOp::antilinear(self.mat.transpose())
        }
    }

    /// `self` after `other`: `(M, w1) o (N, w2)` is `(M N, w2)` when `w1 = +1`
    /// and `(M conj(N), -w2)` when `w1 = -1`.
    pub fn compose(&self, other: &RealLinearOp) -> RealLinearOp {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in composition");
        if self.varpi == 1 {
            RealLinearOp { mat: &self.mat * &other.mat, varpi: other.varpi }
        } else {
            RealLinearOp { mat: &self.mat * &other.mat.conj(), varpi: -other.varpi }
        }
    }

    /// Frobenius distance to another operator of the same linearity type;
    /// operators of different types are never close.
    pub fn distance(&self, other: &RealLinearOp) -> f64 {
        if self.varpi != other.varpi {
            f64::INFINITY
        } else {
            (&self.mat - &other.mat).norm_fro()
        }
    }
}

/// The pair of spectral projections `P+- = (1 +- eta)/2`.
#[derive(Debug, Clone)]
pub struct FundamentalDecomposition {
    pub p_plus: ComplexMatrix,
    pub p_minus: ComplexMatrix,
}

/// Strips an invertible Hermitian `eta'` to its polar sign: returns
/// `(w, metric)` with `w = sqrt(|eta'|)` positive definite and
/// `eta = eta' |eta'|^-1`, so that `eta' = w eta w`.
pub fn normalize_metric(
    eta_prime: &ComplexMatrix,
    tol: f64,
) -> Result<(ComplexMatrix, KreinMetric), KreinError> {
    let eig = herm_eig(eta_prime, tol)?;
    let span = eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1.0);
    if eig.values.iter().any(|x| x.abs() <= tol * span) {
        return Err(NumError::Singular.into());
    }
    let w = eig.assemble(|x| x.abs().sqrt());
    let eta = eig.assemble(|x| if x >= 0.0 { 1.0 } else { -1.0 });
    let kappa_plus = eig.values.iter().filter(|x| **x > 0.0).count();
    let kappa_minus = eta_prime.dim() - kappa_plus;
    Ok((w, KreinMetric { eta, kappa_plus, kappa_minus }))
}

/// The indefinite adjoint `A# = eta A* eta`, computed with the real-linear
/// composition rules so anti-linear operators are handled uniformly.
pub fn eta_adjoint(a: &RealLinearOp, metric: &KreinMetric) -> Result<RealLinearOp, KreinError> {
    if a.dim() != metric.dim() {
        return Err(KreinError::DimensionMismatch { expected: metric.dim(), got: a.dim() });
    }
    let eta_op = RealLinearOp::linear(metric.eta().clone());
    Ok(eta_op.compose(&a.adjoint()).compose(&eta_op))
}

/// Is `H = eta H* eta` within `tol * max(1, ||H||)`?
pub fn is_eta_selfadjoint(h: &ComplexMatrix, metric: &KreinMetric, tol: f64) -> Verdict {
    assert_eq!(h.dim(), metric.dim(), "dimension mismatch");
    let sharp = &(metric.eta() * &h.adjoint()) * metric.eta();
    let residual = (h - &sharp).norm_fro();
    Verdict { ok: residual <= tol * h.norm_fro().max(1.0), residual }
}

pub fn fundamental_decomposition(metric: &KreinMetric) -> FundamentalDecomposition {
    let n = metric.dim();
    let one = ComplexMatrix::identity(n);
    let p_plus = (&one + metric.eta()).scaled(c64::new(0.5, 0.0));
    let p_minus = (&one - metric.eta()).scaled(c64::new(0.5, 0.0));
    FundamentalDecomposition { p_plus, p_minus }
}

/// Builds the standard anti-linear conjugation `C` (entrywise conjugation in
/// an eta-diagonalizing orthonormal basis, so `C^2 = 1` and `C eta = eta C`)
/// and, when the signature is balanced, the standard reflection `R`
/// (Hermitian unitary involution with `R eta = -eta R` and `R C = C R`).
///
/// The diagonalizing basis is ordered by ascending eta-eigenvalue with a
/// deterministic solver, so repeated calls give identical bytes.
pub fn standard_conjugation_and_reflection(
    metric: &KreinMetric,
    tol: f64,
) -> Result<(RealLinearOp, Result<ComplexMatrix, KreinError>), KreinError> {
    let eig = herm_eig(metric.eta(), tol)?;
    let v = &eig.vectors;
    let c = RealLinearOp::antilinear(v * &v.transpose());
    let r = if metric.kappa_plus() != metric.kappa_minus() {
        Err(KreinError::Unavailable(
            "reflection",
            format!(
                "signature ({}, {}) is unbalanced",
                metric.kappa_plus(),
                metric.kappa_minus()
            ),
        ))
    } else {
        let k = metric.kappa();
        // swap the negative block (first k basis columns, ascending order)
        // with the positive block
        let mut swap = ComplexMatrix::zeros(2 * k);
        for i in 0..k {
            swap[(i, k + i)] = c64::new(1.0, 0.0);
            swap[(k + i, i)] = c64::new(1.0, 0.0);
        }
        Ok(&(v * &swap) * &v.adjoint())
    };
    Ok((c, r))
}
