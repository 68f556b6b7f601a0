//! Classification of involutive symmetries of an indefinite metric space.
//!
//! A symmetry here is an invertible real-linear operator `U` satisfying one
//! of the sign relations `eta U* = +- U^-1 eta`. Together with linearity
//! (`varpi`), the sign in that relation (`wp`), the square `U^2 = eps` for
//! anti-linear `U`, and the commutation sign `c` against a reference
//! Hamiltonian, this sorts involutive symmetries into twelve named types.

use thiserror::Error;

use crate::csym::{CSymmetry, CsymError};
use crate::krein::{KreinMetric, RealLinearOp};
use crate::numkit::{ComplexMatrix, NumError};

#[derive(Debug, Error)]
pub enum SymclassError {
    #[error("no eta-symmetry sign relation holds (residual {res_plus:.3e} for +, {res_minus:.3e} for -)")]
    NotAnEtaSymmetry { res_plus: f64, res_minus: f64 },
    #[error("operator does not square to a sign (residual {res_plus:.3e} for +1, {res_minus:.3e} for -1)")]
    NotInvolutive { res_plus: f64, res_minus: f64 },
    #[error("operator neither commutes nor anticommutes with the Hamiltonian (residual {res_plus:.3e} / {res_minus:.3e})")]
    NeitherCommutesNorAnticommutes { res_plus: f64, res_minus: f64 },
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error(transparent)]
    Symmetry(#[from] CsymError),
}

/// The four signs classifying an involutive symmetry. `epsilon` is `None`
/// for linear operators (a phase redefinition absorbs the square, so the
/// sign carries no information); `c` is `None` when no reference
/// Hamiltonian was supplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetrySignature {
    pub varpi: i8,
    pub wp: i8,
    pub epsilon: Option<i8>,
    pub c: Option<i8>,
}

/// Signature plus the matching table-row name. `degenerate` flags inputs
/// where both commutation signs hold (for example a zero Hamiltonian); the
/// reported `c` is then `+1` by convention.
#[derive(Debug, Clone)]
pub struct Classification {
    pub signature: SymmetrySignature,
    pub name: String,
    pub degenerate: bool,
}

fn rel_tol(tol: f64, scale: f64) -> f64 {
    tol * scale.max(1.0)
}

/// Determines the sign `wp` in `eta U* = wp U^-1 eta` (and reads `varpi`
/// off the operator). Fails when neither sign relation holds.
pub fn classify_isometry_type(
    u: &RealLinearOp,
    metric: &KreinMetric,
    tol: f64,
) -> Result<(i8, i8), SymclassError> {
    assert_eq!(u.dim(), metric.dim(), "dimension mismatch");
    let eta = metric.eta();
    let (lhs, rhs) = if u.varpi == 1 {
        (eta * &u.mat.adjoint(), &u.mat.inverse()? * eta)
    } else {
        // anti-linear (M, -1): adjoint is (M^T, -1), inverse is (conj(M)^-1, -1);
        // composing through the conjugations leaves plain matrix identities
        (
            eta * &u.mat.transpose(),
            &u.mat.conj().inverse()? * &eta.conj(),
        )
    };
    let scale = lhs.norm_fro().max(rhs.norm_fro());
    let res_plus = (&lhs - &rhs).norm_fro();
    let res_minus = (&lhs + &rhs).norm_fro();
    if res_plus <= rel_tol(tol, scale) {
        Ok((1, u.varpi))
    } else if res_minus <= rel_tol(tol, scale) {
        Ok((-1, u.varpi))
    } else {
        Err(SymclassError::NotAnEtaSymmetry { res_plus, res_minus })
    }
}

fn involution_sign(u: &RealLinearOp, tol: f64) -> Result<i8, SymclassError> {
    let sq = u.compose(u);
    debug_assert_eq!(sq.varpi, 1);
    let n = sq.mat.dim();
    let one = ComplexMatrix::identity(n);
    let scale = sq.mat.norm_fro().max(1.0);
    let res_plus = (&sq.mat - &one).norm_fro();
    let res_minus = (&sq.mat + &one).norm_fro();
    if res_plus <= rel_tol(tol, scale) {
        Ok(1)
    } else if res_minus <= rel_tol(tol, scale) {
        Ok(-1)
    } else {
        Err(SymclassError::NotInvolutive { res_plus, res_minus })
    }
}

fn commutation_sign(
    u: &RealLinearOp,
    h: &ComplexMatrix,
    tol: f64,
) -> Result<(i8, bool), SymclassError> {
    let h_op = RealLinearOp::linear(h.clone());
    let uh = u.compose(&h_op);
    let hu = h_op.compose(u);
    let scale = uh.mat.norm_fro().max(hu.mat.norm_fro());
    let res_plus = (&uh.mat - &hu.mat).norm_fro();
    let res_minus = (&uh.mat + &hu.mat).norm_fro();
    let plus_ok = res_plus <= rel_tol(tol, scale);
    let minus_ok = res_minus <= rel_tol(tol, scale);
    match (plus_ok, minus_ok) {
        (true, true) => Ok((1, true)),
        (true, false) => Ok((1, false)),
        (false, true) => Ok((-1, false)),
        (false, false) => {
            Err(SymclassError::NeitherCommutesNorAnticommutes { res_plus, res_minus })
        }
    }
}

fn quadrant_name(varpi: i8, wp: i8) -> &'static str {
    match (varpi, wp) {
        (1, 1) => "η-unitary",
        (-1, 1) => "η-anti-unitary",
        (1, -1) => "η-pseudo-unitary",
        _ => "η-pseudo-anti-unitary",
    }
}

fn row_name(sig: &SymmetrySignature) -> String {
    match (sig.varpi, sig.wp, sig.c) {
        (1, 1, Some(1)) => "Proper Linear".into(),
        (1, -1, Some(1)) => "Pure Reflecting R".into(),
        (1, 1, Some(-1)) => "Chiral χ".into(),
        (1, -1, Some(-1)) => "Reflecting Chiral χ_R".into(),
        (-1, wp, Some(c)) => {
            let eps = sig.epsilon.unwrap_or(1);
            let parity = if eps == 1 { "Even" } else { "Odd" };
            let refl = if wp == -1 { " Reflecting" } else { "" };
            let family = if c == 1 { "Time Reversal T" } else { "Particle-Hole P" };
            let sub = if wp == -1 { "_R" } else { "" };
            let sign = if eps == 1 { "(+)" } else { "(-)" };
            format!("{parity}{refl} {family}{sub}{sign}")
        }
        _ => quadrant_name(sig.varpi, sig.wp).into(),
    }
}

/// Full classification against an optional reference Hamiltonian. Without
/// one, only the `(varpi, wp)` quadrant name is reported. Linear operators
/// may square to either sign (the phase `U -> iU` toggles it, so both label
/// the same symmetry); anti-linear squares fix `epsilon`.
pub fn classify_involutive_symmetry(
    u: &RealLinearOp,
    metric: &KreinMetric,
    h: Option<&ComplexMatrix>,
    tol: f64,
) -> Result<Classification, SymclassError> {
    let (wp, varpi) = classify_isometry_type(u, metric, tol)?;
    let sq_sign = involution_sign(u, tol)?;
    let epsilon = if varpi == -1 { Some(sq_sign) } else { None };
    let (c, degenerate) = match h {
        Some(h) => {
            let (c, d) = commutation_sign(u, h, tol)?;
            (Some(c), d)
        }
        None => (None, false),
    };
    let signature = SymmetrySignature { varpi, wp, epsilon, c };
    Ok(Classification { name: row_name(&signature), signature, degenerate })
}

/// Residual evidence attached to a [`transform_symmetry`] result.
#[derive(Debug, Clone, Copy)]
pub struct TransformVerdict {
    /// sign relation type of the input, when it classified at all
    pub wp: Option<i8>,
    /// does `U Xi = wp Xi U` hold, making the reduced operator genuinely
    /// (anti-)unitary?
    pub compatible: bool,
    pub compatibility_residual: f64,
    /// `|| Utilde* Utilde - 1 ||`
    pub unitarity_residual: f64,
    /// `|| Utilde eta - wp eta Utilde ||`
    pub eta_relation_residual: f64,
}

/// Conjugates a symmetry into the reduced picture: `Utilde = G U G^-1` with
/// `G = sqrt(eta xi)`. The `(varpi, wp)` type is preserved; when the input
/// satisfies the compatibility relation `U Xi = wp Xi U`, the output is
/// additionally a plain (anti-)unitary with `Utilde eta = wp eta Utilde`.
pub fn transform_symmetry(
    u: &RealLinearOp,
    xi: &CSymmetry,
    tol: f64,
) -> Result<(RealLinearOp, TransformVerdict), SymclassError> {
    assert_eq!(u.dim(), xi.dim(), "dimension mismatch");
    let metric = xi.metric();
    let g = crate::csym::g_from_xi(xi)?;
    let g_inv = &(metric.eta() * &g) * metric.eta();
    let g_op = RealLinearOp::linear(g);
    let g_inv_op = RealLinearOp::linear(g_inv);
    let out = g_op.compose(u).compose(&g_inv_op);

    let wp = classify_isometry_type(u, metric, tol).ok().map(|(wp, _)| wp);
    let (compatible, compatibility_residual, unitarity_residual, eta_relation_residual) =
        match wp {
            None => (false, f64::INFINITY, f64::INFINITY, f64::INFINITY),
            Some(wp) => {
                let xi_op = RealLinearOp::linear(xi.xi().clone());
                let uxi = u.compose(&xi_op);
                let xiu = xi_op.compose(u);
                let scale = uxi.mat.norm_fro().max(xiu.mat.norm_fro()).max(1.0);
                let comp_res = if wp == 1 {
                    (&uxi.mat - &xiu.mat).norm_fro()
                } else {
                    (&uxi.mat + &xiu.mat).norm_fro()
                };
                let star_sq = out.adjoint().compose(&out);
                let unit_res = star_sq.mat.identity_residual();
                let eta_op = RealLinearOp::linear(metric.eta().clone());
                let ue = out.compose(&eta_op);
                let eu = eta_op.compose(&out);
                let eta_res = if wp == 1 {
                    (&ue.mat - &eu.mat).norm_fro()
                } else {
                    (&ue.mat + &eu.mat).norm_fro()
                };
                (comp_res <= rel_tol(tol, scale), comp_res, unit_res, eta_res)
            }
        };
    Ok((
        out,
        TransformVerdict {
            wp,
            compatible,
            compatibility_residual,
            unitarity_residual,
            eta_relation_residual,
        },
    ))
}
