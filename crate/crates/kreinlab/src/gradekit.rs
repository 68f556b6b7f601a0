//! Gradations (self-adjoint involutions), spectral flattening of gapped
//! Hamiltonians, the exponential map producing a complementary gradation
//! from an odd contraction, swap homotopies on the doubled space, and the
//! complete two-dimensional classification of gapped operators commuting
//! with a C-symmetry.

use thiserror::Error;

use crate::csym::CSymmetry;
use crate::krein::{KreinMetric, RealLinearOp};
use crate::numkit::{c64, herm_eig, spectral_norm, ComplexMatrix, NumError};

#[derive(Debug, Error)]
pub enum GradeError {
    #[error("spectral gap closed: level is within {distance:.3e} of the spectrum")]
    GapClosed { distance: f64 },
    #[error("precondition violated: {condition} (residual {residual:.3e})")]
    PreconditionViolated { condition: &'static str, residual: f64 },
    #[error("context mismatch: {0}")]
    ContextMismatch(String),
    #[error("operators do not commute (residual {residual:.3e})")]
    NotCommuting { residual: f64 },
    #[error("operator is not in the commutant span (residual {residual:.3e})")]
    NotInCommutant { residual: f64 },
    #[error("parameter out of domain: {0}")]
    OutOfDomain(String),
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error(transparent)]
    Metric(#[from] crate::krein::KreinError),
}

/// A gradation: Hermitian involution, optionally required to commute with a
/// fundamental symmetry (making it a graded structure on the Krein space).
#[derive(Debug, Clone)]
pub struct Gradation {
    gamma: ComplexMatrix,
    metric: Option<KreinMetric>,
}

impl Gradation {
    pub fn new(
        gamma: ComplexMatrix,
        metric: Option<KreinMetric>,
        tol: f64,
    ) -> Result<Gradation, GradeError> {
        let scale = gamma.norm_fro().max(1.0);
        let herm = gamma.herm_residual();
        if herm > tol * scale {
            return Err(GradeError::PreconditionViolated {
                condition: "gradation must be self-adjoint",
                residual: herm,
            });
        }
        let inv = (&(&gamma * &gamma) - &ComplexMatrix::identity(gamma.dim())).norm_fro();
        if inv > tol * scale * scale {
            return Err(GradeError::PreconditionViolated {
                condition: "gradation must square to the identity",
                residual: inv,
            });
        }
        if let Some(m) = &metric {
            if m.dim() != gamma.dim() {
                return Err(GradeError::ContextMismatch(format!(
                    "metric dimension {} vs gradation dimension {}",
                    m.dim(),
                    gamma.dim()
                )));
            }
            let comm = (&(&gamma * m.eta()) - &(m.eta() * &gamma)).norm_fro();
            if comm > tol * scale {
                return Err(GradeError::PreconditionViolated {
                    condition: "gradation must commute with the metric",
                    residual: comm,
                });
            }
        }
        Ok(Gradation { gamma, metric })
    }

    pub fn gamma(&self) -> &ComplexMatrix {
        &self.gamma
    }

    pub fn metric(&self) -> Option<&KreinMetric> {
        self.metric.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.gamma.dim()
    }
}

/// A doubled-space comparison datum: two gradations compatible with one
/// shared symmetry context (group part with commutation signs, plus a
/// Clifford part that must anticommute).
#[derive(Debug, Clone)]
pub struct KaroubiTriple {
    pub dimension: usize,
    pub rho: Vec<(RealLinearOp, i8)>,
    pub cliffords: Vec<ComplexMatrix>,
    pub gamma0: Gradation,
    pub gamma1: Gradation,
}

impl KaroubiTriple {
    pub fn new(
        rho: Vec<(RealLinearOp, i8)>,
        cliffords: Vec<ComplexMatrix>,
        gamma0: Gradation,
        gamma1: Gradation,
        metric: Option<&KreinMetric>,
        tol: f64,
    ) -> Result<KaroubiTriple, GradeError> {
        let dimension = gamma0.dim();
        if gamma1.dim() != dimension {
            return Err(GradeError::ContextMismatch(format!(
                "gradation dimensions differ: {} vs {}",
                dimension,
                gamma1.dim()
            )));
        }
        for g in [&gamma0, &gamma1] {
            let v = compatibility(g.gamma(), metric, &rho, &cliffords, tol);
            if !v.ok {
                return Err(GradeError::PreconditionViolated {
                    condition: "gradation incompatible with the symmetry context",
                    residual: v.worst(),
                });
            }
        }
        Ok(KaroubiTriple { dimension, rho, cliffords, gamma0, gamma1 })
    }
}

/// Residuals of every compatibility relation a graded structure must
/// satisfy; `ok` aggregates them against the tolerance used for the check.
#[derive(Debug, Clone)]
pub struct GradationVerdict {
    pub ok: bool,
    pub herm_residual: f64,
    pub involution_residual: f64,
    pub metric_residual: Option<f64>,
    pub rho_residuals: Vec<f64>,
    pub clifford_residuals: Vec<f64>,
}

impl GradationVerdict {
    pub fn worst(&self) -> f64 {
        let mut w = self.herm_residual.max(self.involution_residual);
        if let Some(m) = self.metric_residual {
            w = w.max(m);
        }
        for r in self.rho_residuals.iter().chain(&self.clifford_residuals) {
            w = w.max(*r);
        }
        w
    }
}

fn compatibility(
    gamma: &ComplexMatrix,
    metric: Option<&KreinMetric>,
    rho: &[(RealLinearOp, i8)],
    cliffords: &[ComplexMatrix],
    tol: f64,
) -> GradationVerdict {
    let scale = gamma.norm_fro().max(1.0);
    let herm_residual = gamma.herm_residual();
    let involution_residual =
        (&(gamma * gamma) - &ComplexMatrix::identity(gamma.dim())).norm_fro();
    let metric_residual = metric.map(|m| {
        (&(gamma * m.eta()) - &(m.eta() * gamma)).norm_fro()
    });
    let gamma_op = RealLinearOp::linear(gamma.clone());
    let rho_residuals: Vec<f64> = rho
        .iter()
        .map(|(op, sign)| {
            let lhs = gamma_op.compose(op);
            let rhs = op.compose(&gamma_op);
            let rhs_mat = rhs.mat.scaled(c64::new(*sign as f64, 0.0));
            (&lhs.mat - &rhs_mat).norm_fro()
        })
        .collect();
    let clifford_residuals: Vec<f64> = cliffords
        .iter()
        .map(|g| (&(gamma * g) + &(g * gamma)).norm_fro())
        .collect();
    let thresh = tol * scale.max(scale * scale);
    let ok = herm_residual <= thresh
        && involution_residual <= thresh
        && metric_residual.map_or(true, |r| r <= thresh)
        && rho_residuals.iter().all(|r| {
            *r <= tol
                * rho
                    .iter()
                    .map(|(op, _)| op.mat.norm_fro())
                    .fold(1.0, f64::max)
                * scale
        })
        && clifford_residuals.iter().all(|r| {
            *r <= tol * cliffords.iter().map(|g| g.norm_fro()).fold(1.0, f64::max) * scale
        });
    GradationVerdict {
        ok,
        herm_residual,
        involution_residual,
        metric_residual,
        rho_residuals,
        clifford_residuals,
    }
}

/// Checks every graded-compatibility relation of `gamma` against a metric,
/// a list of symmetries with their commutation signs, and a Clifford action
/// (which must anticommute with the gradation).
pub fn is_eta_gradation(
    gamma: &ComplexMatrix,
    metric: &KreinMetric,
    rho: &[(RealLinearOp, i8)],
    cliffords: &[ComplexMatrix],
    tol: f64,
) -> GradationVerdict {
    compatibility(gamma, Some(metric), rho, cliffords, tol)
}

/// Flattens a gapped Hermitian matrix at level `lambda`: returns
/// `sign(h - lambda)` plus a flag telling whether `lambda` actually
/// separates the spectrum (false means the output is `+-1`, a trivial
/// gradation). Fails when `lambda` is within `tol * (1 + span)` of an
/// eigenvalue.
pub fn spectral_flatten(
    h: &ComplexMatrix,
    lambda: f64,
    tol: f64,
) -> Result<(Gradation, bool), GradeError> {
    let eig = herm_eig(h, tol)?;
    let span = eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let distance = eig
        .values
        .iter()
        .map(|x| (x - lambda).abs())
        .fold(f64::INFINITY, f64::min);
    if distance <= tol * (1.0 + span) {
        return Err(GradeError::GapClosed { distance });
    }
    let gamma = eig.assemble(|x| if x > lambda { 1.0 } else { -1.0 });
    let lo = eig.values.first().copied().unwrap_or(0.0);
    let hi = eig.values.last().copied().unwrap_or(0.0);
    let nontrivial = lo < lambda && lambda < hi;
    Ok((Gradation::new(gamma, None, (100.0 * tol).min(1e-6))?, nontrivial))
}

/// `-exp(pi A Gamma) Gamma` for a self-adjoint contraction `A`
/// anticommuting with the gradation: another gradation, anticommuting with
/// the first exactly when `A` is unitary on its support. The spectra pair
/// up as `spec(A Gamma) = i spec(A)`, which is verified as a side effect.
pub fn theta_map(
    a: &ComplexMatrix,
    gamma: &Gradation,
    tol: f64,
) -> Result<Gradation, GradeError> {
    assert_eq!(a.dim(), gamma.dim(), "dimension mismatch");
    let scale = a.norm_fro().max(1.0);
    let herm = a.herm_residual();
    if herm > tol * scale {
        return Err(GradeError::PreconditionViolated {
            condition: "argument must be self-adjoint",
            residual: herm,
        });
    }
    let g = gamma.gamma();
    let anti = (&(a * g) + &(g * a)).norm_fro();
    if anti > tol * scale {
        return Err(GradeError::PreconditionViolated {
            condition: "argument must anticommute with the gradation",
            residual: anti,
        });
    }
    let a_eig = herm_eig(a, tol)?;
    let radius = a_eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if radius > 1.0 + tol {
        return Err(GradeError::PreconditionViolated {
            condition: "spectrum must lie in [-1, 1]",
            residual: radius - 1.0,
        });
    }
    // A*Gamma is anti-Hermitian, so i*A*Gamma is Hermitian with spectrum mu
    // and A*Gamma = V diag(-i mu) V*
    let ag = a * g;
    let i_ag = ag.scaled(c64::i());
    let eig = herm_eig(&i_ag, tol)?;
    // pairing check: spec(A Gamma) = i spec(A) means {-mu} = {spec(A)}
    let mut neg_mu: Vec<f64> = eig.values.iter().map(|x| -x).collect();
    neg_mu.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let worst_pair = neg_mu
        .iter()
        .zip(&a_eig.values)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    if worst_pair > 100.0 * tol * (1.0 + radius) {
        return Err(GradeError::PreconditionViolated {
            condition: "spectral pairing of the odd part failed",
            residual: worst_pair,
        });
    }
    let exp_pi_ag = eig.assemble_complex(|mu| (-c64::i() * std::f64::consts::PI * mu).exp());
    let out = (&exp_pi_ag * g).scaled(c64::new(-1.0, 0.0));
    Gradation::new(out, gamma.metric().cloned(), (100.0 * tol).min(1e-6))
}

fn rotation_block(theta: f64, n: usize) -> ComplexMatrix {
    let (s, c) = theta.sin_cos();
    let mut t = ComplexMatrix::zeros(2 * n);
    for i in 0..n {
        t[(i, i)] = c64::new(c, 0.0);
        t[(i, n + i)] = c64::new(s, 0.0);
        t[(n + i, i)] = c64::new(s, 0.0);
        t[(n + i, n + i)] = c64::new(-c, 0.0);
    }
    t
}

/// Point `theta` on the swap homotopy between `g0 (+) g1` and `g1 (+) g0`
/// on the doubled space: conjugation of the direct sum by the reflection
/// `T_theta`, itself a self-adjoint unitary involution. Every point of the
/// path is a gradation.
pub fn gradation_swap_path(
    g0: &Gradation,
    g1: &Gradation,
    theta: f64,
) -> Result<Gradation, GradeError> {
    let n = g0.dim();
    if g1.dim() != n {
        return Err(GradeError::ContextMismatch(format!(
            "dimensions differ: {} vs {}",
            n,
            g1.dim()
        )));
    }
    let doubled_metric = match (g0.metric(), g1.metric()) {
        (None, None) => None,
        (Some(m0), Some(m1)) => {
            if (m0.eta() - m1.eta()).norm_fro() > 1e-12 * m0.eta().norm_fro().max(1.0) {
                return Err(GradeError::ContextMismatch("metrics differ".into()));
            }
            let mut big = ComplexMatrix::zeros(2 * n);
            for i in 0..n {
                for j in 0..n {
                    big[(i, j)] = m0.eta()[(i, j)];
                    big[(n + i, n + j)] = m0.eta()[(i, j)];
                }
            }
            Some(KreinMetric::new(big, 1e-10)?)
        }
        _ => {
            return Err(GradeError::ContextMismatch(
                "one gradation carries a metric, the other does not".into(),
            ))
        }
    };
    let mut dsum = ComplexMatrix::zeros(2 * n);
    for i in 0..n {
        for j in 0..n {
            dsum[(i, j)] = g0.gamma()[(i, j)];
            dsum[(n + i, n + j)] = g1.gamma()[(i, j)];
        }
    }
    let t = rotation_block(theta, n);
    let out = &(&t * &dsum) * &t;
    Gradation::new(out, doubled_metric, 1e-9)
}

/// Maximum operator-norm jump between consecutive points of the swap path
/// sampled on `steps + 1` equispaced angles in `[0, pi/2]`.
pub fn swap_path_continuity(
    g0: &Gradation,
    g1: &Gradation,
    steps: usize,
) -> Result<f64, GradeError> {
    assert!(steps >= 1);
    let mut prev: Option<ComplexMatrix> = None;
    let mut worst = 0.0_f64;
    for k in 0..=steps {
        let theta = std::f64::consts::FRAC_PI_2 * (k as f64) / (steps as f64);
        let g = gradation_swap_path(g0, g1, theta)?;
        if let Some(p) = prev {
            worst = worst.max(spectral_norm(&(g.gamma() - &p)));
        }
        prev = Some(g.gamma().clone());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Two-dimensional closed forms over eta = diag(1, -1)
// ---------------------------------------------------------------------------

fn check_r(r: f64) -> Result<(), GradeError> {
    if !(r >= 0.0) {
        return Err(GradeError::OutOfDomain(format!("radius must be >= 0, got {r}")));
    }
    Ok(())
}

fn check_angle(name: &str, a: f64) -> Result<(), GradeError> {
    if !(-std::f64::consts::PI..=std::f64::consts::PI).contains(&a) {
        return Err(GradeError::OutOfDomain(format!(
            "angle {name} must lie in [-pi, pi], got {a}"
        )));
    }
    Ok(())
}

/// The general 2x2 eta-unitary: operator norm `r + sqrt(1 + r^2)`.
pub fn family_unitary(
    r: f64,
    alpha: f64,
    beta: f64,
    delta: f64,
) -> Result<ComplexMatrix, GradeError> {
    check_r(r)?;
    check_angle("alpha", alpha)?;
    check_angle("beta", beta)?;
    check_angle("delta", delta)?;
    let s = (1.0 + r * r).sqrt();
    Ok(ComplexMatrix::from_rows(
        2,
        &[
            c64::from_polar(s, alpha),
            c64::from_polar(r, beta + delta),
            c64::from_polar(r, alpha - delta),
            c64::from_polar(s, beta),
        ],
    ))
}

/// The general 2x2 eta-self-adjoint matrix.
pub fn family_hamiltonian(x1: f64, x2: f64, y: f64, z: f64) -> ComplexMatrix {
    ComplexMatrix::from_rows(
        2,
        &[
            c64::new(x1, 0.0),
            c64::new(y, z),
            c64::new(-y, z),
            c64::new(x2, 0.0),
        ],
    )
}

/// The general 2x2 C-symmetry: `r = 0` gives the metric itself; operator
/// norm `r + sqrt(1 + r^2)`.
pub fn family_csymmetry(r: f64, theta: f64) -> Result<ComplexMatrix, GradeError> {
    check_r(r)?;
    check_angle("theta", theta)?;
    let s = (1.0 + r * r).sqrt();
    Ok(ComplexMatrix::from_rows(
        2,
        &[
            c64::new(s, 0.0),
            c64::from_polar(r, theta),
            -c64::from_polar(r, -theta),
            c64::new(-s, 0.0),
        ],
    ))
}

/// The general 2x2 Hermitian generator anticommuting with the metric:
/// operator norm `r`.
pub fn family_generator(r: f64, theta: f64) -> Result<ComplexMatrix, GradeError> {
    check_r(r)?;
    check_angle("theta", theta)?;
    Ok(ComplexMatrix::from_rows(
        2,
        &[
            c64::new(0.0, 0.0),
            c64::from_polar(r, theta),
            c64::from_polar(r, -theta),
            c64::new(0.0, 0.0),
        ],
    ))
}

/// Splits a 2x2 operator commuting with `xi` as `h = u 1 + v xi` with real
/// coefficients: `u = tr(h)/2`, `v = tr(h xi)/2`.
pub fn decompose_commuting(h: &ComplexMatrix, xi: &CSymmetry) -> Result<(f64, f64), GradeError> {
    if h.dim() != 2 || xi.dim() != 2 {
        return Err(GradeError::OutOfDomain(format!(
            "decomposition is two-dimensional only, got dimension {}",
            h.dim().max(xi.dim())
        )));
    }
    let scale = h.norm_fro().max(1.0);
    let comm = (&(h * xi.xi()) - &(xi.xi() * h)).norm_fro();
    if comm > 1e-9 * scale {
        return Err(GradeError::NotCommuting { residual: comm });
    }
    let u = (h.trace() * 0.5).re;
    let v = ((h * xi.xi()).trace() * 0.5).re;
    let rebuilt = &ComplexMatrix::identity(2).scaled(c64::new(u, 0.0))
        + &xi.xi().scaled(c64::new(v, 0.0));
    let res = (h - &rebuilt).norm_fro();
    if res > 1e-9 * scale {
        return Err(GradeError::NotInCommutant { residual: res });
    }
    Ok((u, v))
}

/// Connected-component label of a gapped 2x2 operator in the commutant of
/// `xi`: the pair of signs of the two eigenvalues `u + v` and `u - v`.
/// These signs are complete invariants in dimension two, so no homotopy
/// search is needed.
pub fn classify_gapped_2d(
    h: &ComplexMatrix,
    xi: &CSymmetry,
    tol: f64,
) -> Result<(i8, i8), GradeError> {
    let (u, v) = decompose_commuting(h, xi)?;
    let scale = h.norm_fro().max(1.0);
    let gap = (u + v).abs().min((u - v).abs());
    if gap <= tol * scale {
        return Err(GradeError::GapClosed { distance: gap });
    }
    Ok((
        if u + v > 0.0 { 1 } else { -1 },
        if u - v > 0.0 { 1 } else { -1 },
    ))
}
