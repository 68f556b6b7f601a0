//! C-symmetries and dynamical stability. A C-symmetry for a metric `eta` is
//! an involution `Xi` with `eta Xi` positive definite; an eta-self-adjoint
//! `H` commuting with such a `Xi` is similar, through `G = sqrt(eta Xi)`, to
//! an ordinary Hermitian matrix that commutes with `eta`. That similarity is
//! the whole stability story: it exists exactly when `H` is diagonalizable
//! with real spectrum and no eta-neutral eigenvector, and it hands back a
//! bounded functional calculus and a group of eta-unitary propagators.

use thiserror::Error;

use crate::krein::KreinMetric;
use crate::numkit::{
    c64, complex_schur, herm_eig, spectra_match, ComplexMatrix, HermEig, NumError,
};

#[derive(Debug, Error)]
pub enum CsymError {
    #[error("not a C-symmetry (involution residual {involution_residual:.3e}, min eigenvalue of eta*xi {min_eig:.3e})")]
    NotACSymmetry { involution_residual: f64, min_eig: f64 },
    #[error("not an admissible generator (hermitian residual {herm_residual:.3e}, eta-anticommutator residual {anticommute_residual:.3e})")]
    NotInRSpace { herm_residual: f64, anticommute_residual: f64 },
    #[error("operator is not eta-self-adjoint (residual {residual:.3e})")]
    NotEtaSelfAdjoint { residual: f64 },
    #[error("operator does not commute with the given C-symmetry (residual {residual:.3e})")]
    DoesNotCommuteWithXi { residual: f64 },
    #[error("not dynamically stable: {obstruction}")]
    NotDynamicallyStable { obstruction: Obstruction },
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Why no C-symmetry commuting with the operator can exist.
#[derive(Debug, Clone)]
pub enum Obstruction {
    NonRealEigenvalue { value: c64 },
    DefectiveEigenvalue { condition: f64 },
    NeutralEigenvector { value: f64, eta_norm: f64 },
}

impl std::fmt::Display for Obstruction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Obstruction::NonRealEigenvalue { value } => {
                write!(f, "non-real eigenvalue {:.6e}{:+.6e}i", value.re, value.im)
            }
            Obstruction::DefectiveEigenvalue { condition } => {
                write!(f, "defective spectrum (eigenbasis condition {condition:.3e})")
            }
            Obstruction::NeutralEigenvector { value, eta_norm } => {
                write!(f, "eta-neutral eigenvector at eigenvalue {value:.6e} (eta-norm {eta_norm:.3e})")
            }
        }
    }
}

/// Validated C-symmetry: `xi^2 = 1` and `eta xi > 0`.
#[derive(Debug, Clone)]
pub struct CSymmetry {
    xi: ComplexMatrix,
    metric: KreinMetric,
}

/// Numeric evidence for [`is_csymmetry`]: the involution defect and the
/// smallest eigenvalue of the Hermitian part of `eta xi`.
#[derive(Debug, Clone, Copy)]
pub struct CSymmetryVerdict {
    pub ok: bool,
    pub involution_residual: f64,
    pub min_eig: f64,
}

/// Checks `xi^2 = 1` and positive definiteness of `eta xi` (via its
/// Hermitian part, which equals `eta xi` itself whenever `xi` is
/// eta-self-adjoint).
pub fn is_csymmetry(xi: &ComplexMatrix, metric: &KreinMetric, tol: f64) -> CSymmetryVerdict {
    assert_eq!(xi.dim(), metric.dim(), "dimension mismatch");
    let n = xi.dim();
    let scale = xi.norm_fro().max(1.0);
    let involution_residual = (&(xi * xi) - &ComplexMatrix::identity(n)).norm_fro();
    let ex = metric.eta() * xi;
    let herm_part = (&ex + &ex.adjoint()).scaled(c64::new(0.5, 0.0));
    let min_eig = match herm_eig(&herm_part, tol.max(1e-12)) {
        Ok(eig) => eig.values.first().copied().unwrap_or(0.0),
        Err(_) => f64::NEG_INFINITY,
    };
    // how far eta*xi is from its hermitian part; nonzero means xi is not
    // even eta-self-adjoint
    let skew = (&ex - &herm_part).norm_fro();
    let ok = involution_residual <= tol * scale.powi(2)
        && min_eig > tol
        && skew <= tol * scale;
    CSymmetryVerdict { ok, involution_residual, min_eig }
}

impl CSymmetry {
    pub fn new(xi: ComplexMatrix, metric: KreinMetric, tol: f64) -> Result<CSymmetry, CsymError> {
        let verdict = is_csymmetry(&xi, &metric, tol);
        if !verdict.ok {
            return Err(CsymError::NotACSymmetry {
                involution_residual: verdict.involution_residual,
                min_eig: verdict.min_eig,
            });
        }
        Ok(CSymmetry { xi, metric })
    }

    /// The trivial C-symmetry `xi = eta`.
    pub fn trivial(metric: KreinMetric) -> CSymmetry {
        CSymmetry { xi: metric.eta().clone(), metric }
    }

    pub fn xi(&self) -> &ComplexMatrix {
        &self.xi
    }

    pub fn metric(&self) -> &KreinMetric {
        &self.metric
    }

    pub fn dim(&self) -> usize {
        self.xi.dim()
    }

    fn eta_xi_eig(&self) -> Result<HermEig, CsymError> {
        let ex = self.metric.eta() * &self.xi;
        // symmetrize before diagonalizing: the product carries rounding noise
        let herm = (&ex + &ex.adjoint()).scaled(c64::new(0.5, 0.0));
        Ok(herm_eig(&herm, 1e-12)?)
    }
}

/// Logarithm side of the bijection between C-symmetries and Hermitian
/// generators anticommuting with `eta`: `Q = log(eta xi)`.
pub fn q_from_xi(xi: &CSymmetry) -> Result<ComplexMatrix, CsymError> {
    // eta*xi is positive definite for a valid C-symmetry, so the principal
    // branch always applies
    let eig = xi.eta_xi_eig()?;
    Ok(eig.assemble(f64::ln))
}

/// Exponential side of the bijection: `xi = eta exp(q)`. The generator must
/// be Hermitian and anticommute with `eta` within `tol`.
pub fn xi_from_q(
    q: &ComplexMatrix,
    metric: &KreinMetric,
    tol: f64,
) -> Result<CSymmetry, CsymError> {
    assert_eq!(q.dim(), metric.dim(), "dimension mismatch");
    let scale = q.norm_fro().max(1.0);
    let herm_residual = q.herm_residual();
    let anticommute_residual = (&(metric.eta() * q) + &(q * metric.eta())).norm_fro();
    if herm_residual > tol * scale || anticommute_residual > tol * scale {
        return Err(CsymError::NotInRSpace { herm_residual, anticommute_residual });
    }
    let eig = herm_eig(q, tol)?;
    let xi = metric.eta() * &eig.assemble(f64::exp);
    // tolerance for validation scales with the conditioning of exp(q)
    let spread = eig.values.last().copied().unwrap_or(0.0) - eig.values.first().copied().unwrap_or(0.0);
    let vtol = (100.0 * tol * spread.exp()).min(1e-6).max(tol);
    CSymmetry::new(xi, metric.clone(), vtol)
}

/// The similarity `G = sqrt(eta xi) = exp(q/2)`: Hermitian, eta-unitary, and
/// conjugating `xi` into `eta`.
pub fn g_from_xi(xi: &CSymmetry) -> Result<ComplexMatrix, CsymError> {
    let eig = xi.eta_xi_eig()?;
    Ok(eig.assemble(f64::sqrt))
}

/// Stability certificate for an eta-self-adjoint operator: the witness
/// triple `(xi, g, h_tilde)` with `h_tilde = g h g^-1` Hermitian and
/// commuting with `eta`.
#[derive(Debug, Clone)]
pub struct StabilityCertificate {
    pub xi: CSymmetry,
    pub g: ComplexMatrix,
    pub h_tilde: ComplexMatrix,
}

impl StabilityCertificate {
    /// `g^-1 = eta g eta`, exact for any eta-unitary Hermitian `g`.
    pub fn g_inv(&self) -> ComplexMatrix {
        let eta = self.xi.metric().eta();
        &(eta * &self.g) * eta
    }
}

/// Conjugates `h` by `G = sqrt(eta xi)`. Fails when `h` is not
/// eta-self-adjoint or does not commute with `xi`; on success the result is
/// Hermitian, commutes with `eta`, and is isospectral to `h`.
pub fn reduce_hamiltonian(
    h: &ComplexMatrix,
    xi: &CSymmetry,
    tol: f64,
) -> Result<StabilityCertificate, CsymError> {
    assert_eq!(h.dim(), xi.dim(), "dimension mismatch");
    let metric = xi.metric();
    let verdict = crate::krein::is_eta_selfadjoint(h, metric, tol);
    if !verdict.ok {
        return Err(CsymError::NotEtaSelfAdjoint { residual: verdict.residual });
    }
    let comm = (&(h * xi.xi()) - &(xi.xi() * h)).norm_fro();
    if comm > tol * h.norm_fro().max(1.0) {
        return Err(CsymError::DoesNotCommuteWithXi { residual: comm });
    }
    let eig = xi.eta_xi_eig()?;
    let g = eig.assemble(f64::sqrt);
    let g_inv = eig.assemble(|x| 1.0 / x.sqrt());
    let h_tilde = &(&g * h) * &g_inv;
    Ok(StabilityCertificate { xi: xi.clone(), g, h_tilde })
}

/// Searches for a C-symmetry commuting with `h`, which exists exactly when
/// `h` is diagonalizable with real spectrum and every eigenvector has
/// nonzero eta-norm. The constructed `xi` acts as `+1` on eigenvectors of
/// positive eta-norm and `-1` on those of negative eta-norm.
pub fn find_csymmetry(
    h: &ComplexMatrix,
    metric: &KreinMetric,
    tol: f64,
) -> Result<CSymmetry, CsymError> {
    assert_eq!(h.dim(), metric.dim(), "dimension mismatch");
    let n = h.dim();
    let verdict = crate::krein::is_eta_selfadjoint(h, metric, tol);
    if !verdict.ok {
        return Err(CsymError::NotEtaSelfAdjoint { residual: verdict.residual });
    }
    let schur = complex_schur(h, 1e-12)?;
    for lam in &schur.eigenvalues {
        if lam.im.abs() > tol * (1.0 + lam.norm()) {
            return Err(CsymError::NotDynamicallyStable {
                obstruction: Obstruction::NonRealEigenvalue { value: *lam },
            });
        }
    }
    // eigenvectors by back-substitution on the sorted triangular factor;
    // tiny denominators inside an eigenvalue cluster get floored so the
    // cluster columns stay independent for diagonalizable input
    let t = &schur.t;
    let floor = 1e-13 * t.norm_fro().max(1.0);
    let mut x = ComplexMatrix::zeros(n);
    for k in 0..n {
        let lam = t[(k, k)];
        x[(k, k)] = c64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut acc = c64::new(0.0, 0.0);
            for l in j + 1..=k {
                acc += t[(j, l)] * x[(l, k)];
            }
            let mut d = t[(j, j)] - lam;
            if d.norm() < floor {
                d = c64::new(floor, 0.0);
            }
            x[(j, k)] = -acc / d;
        }
        // normalize the column
        let nrm: f64 = (0..n).map(|i| x[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        for i in 0..n {
            x[(i, k)] = x[(i, k)] / nrm;
        }
    }
    // defectiveness: condition number of the eigenvector matrix
    let gram = &x.adjoint() * &x;
    let geig = herm_eig(&gram, 1e-12)?;
    let top = geig.values.last().copied().unwrap_or(1.0).max(0.0);
    let bottom = geig.values.first().copied().unwrap_or(1.0);
    let condition = if bottom <= 0.0 { f64::INFINITY } else { (top / bottom).sqrt() };
    if condition > 1.0 / tol {
        return Err(CsymError::NotDynamicallyStable {
            obstruction: Obstruction::DefectiveEigenvalue { condition },
        });
    }
    // eigenvectors in the original basis
    let y = &schur.q * &x;
    // cluster the (sorted, real) eigenvalues
    let span = schur
        .eigenvalues
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let cluster_gap = 100.0 * tol * (1.0 + span);
    let mut basis = ComplexMatrix::zeros(n);
    let mut filled = 0usize;
    let mut start = 0usize;
    while start < n {
        let mut end = start + 1;
        while end < n && (schur.eigenvalues[end].re - schur.eigenvalues[end - 1].re) <= cluster_gap
        {
            end += 1;
        }
        let k = end - start;
        // Gram matrix of the cluster in the indefinite product
        let mut m = ComplexMatrix::zeros(k);
        for a in 0..k {
            for b in 0..k {
                let va: Vec<c64> = (0..n).map(|i| y[(i, start + a)]).collect();
                let vb: Vec<c64> = (0..n).map(|i| y[(i, start + b)]).collect();
                m[(a, b)] = metric.product(&va, &vb);
            }
        }
        let meig = herm_eig(&m, 1e-12)?;
        for (idx, d) in meig.values.iter().enumerate() {
            if d.abs() <= 100.0 * tol {
                return Err(CsymError::NotDynamicallyStable {
                    obstruction: Obstruction::NeutralEigenvector {
                        value: schur.eigenvalues[start].re,
                        eta_norm: *d,
                    },
                });
            }
            let w = 1.0 / d.abs().sqrt();
            for i in 0..n {
                let mut acc = c64::new(0.0, 0.0);
                for a in 0..k {
                    acc += y[(i, start + a)] * meig.vectors[(a, idx)];
                }
                basis[(i, filled)] = acc * w;
            }
            filled += 1;
        }
        start = end;
    }
    // xi = T T* eta, where T has eta-orthonormal columns (eta-norms +-1):
    // with T^-1 = S T* eta this is T S T^-1 for S = diag of the signs
    let xi_mat = &(&basis * &basis.adjoint()) * metric.eta();
    CSymmetry::new(xi_mat, metric.clone(), (100.0 * tol).min(1e-6))
}

/// Argument of [`stable_functional_calculus`]: either a real function of the
/// (real) spectrum, or a time for the Schroedinger propagator.
pub enum StableFun<'a> {
    Real(&'a dyn Fn(f64) -> f64),
    Time(f64),
}

/// Functional calculus through the certificate: `f(h) = g^-1 f(h_tilde) g`.
/// For `Time(t)` the result is the propagator `g^-1 exp(-i t h_tilde) g`,
/// which is eta-unitary and satisfies the group law in `t`.
pub fn stable_functional_calculus(
    h: &ComplexMatrix,
    xi: &CSymmetry,
    fun: StableFun<'_>,
    tol: f64,
) -> Result<ComplexMatrix, CsymError> {
    let cert = reduce_hamiltonian(h, xi, tol)?;
    let heig = herm_eig(&cert.h_tilde, (100.0 * tol).min(1e-6))?;
    let f_ht = match fun {
        StableFun::Real(f) => heig.assemble(f),
        StableFun::Time(t) => heig.assemble_complex(|x| (-c64::i() * t * x).exp()),
    };
    let g_inv = cert.g_inv();
    Ok(&(&g_inv * &f_ht) * &cert.g)
}

/// Spectra of `h` and `h_tilde` agree as multisets; a consistency check on
/// certificates produced elsewhere.
pub fn certificate_isospectral(cert: &StabilityCertificate, h: &ComplexMatrix, tol: f64) -> bool {
    let sh = match complex_schur(h, 1e-12) {
        Ok(s) => s,
        Err(_) => return false,
    };
    let st = match complex_schur(&cert.h_tilde, 1e-12) {
        Ok(s) => s,
        Err(_) => return false,
    };
    spectra_match(&sh.eigenvalues, &st.eigenvalues, tol * (1.0 + h.norm_fro()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> c64 {
        c64::new(re, im)
    }

    // the 2x2 family over eta = diag(1, -1): an involution with eta*xi > 0
    // for every r >= 0, theta
    fn xi2(r: f64, th: f64) -> ComplexMatrix {
        let s = (1.0 + r * r).sqrt();
        ComplexMatrix::from_rows(
            2,
            &[
                c(s, 0.0),
                c(r * th.cos(), r * th.sin()),
                c(-r * th.cos(), r * th.sin()),
                c(-s, 0.0),
            ],
        )
    }

    fn q2(r: f64, th: f64) -> ComplexMatrix {
        ComplexMatrix::from_rows(
            2,
            &[
                c(0.0, 0.0),
                c(r * th.cos(), r * th.sin()),
                c(r * th.cos(), -r * th.sin()),
                c(0.0, 0.0),
            ],
        )
    }

    fn metric2() -> KreinMetric {
        KreinMetric::standard(1, 1)
    }

    #[test]
    fn eta_is_a_csymmetry_and_minus_eta_is_not() {
        let m = metric2();
        let good = is_csymmetry(m.eta(), &m, 1e-10);
        assert!(good.ok);
        assert!(good.involution_residual < 1e-14);
        assert!((good.min_eig - 1.0).abs() < 1e-12);

        let bad = is_csymmetry(&m.eta().scaled(c(-1.0, 0.0)), &m, 1e-10);
        assert!(!bad.ok);
        assert!((bad.min_eig + 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_dim_family_is_csymmetry_with_known_eigenvalues() {
        let m = metric2();
        for (r, th) in [(0.5, 0.0), (1.0, 1.2), (2.5, -0.7)] {
            let xi = xi2(r, th);
            let v = is_csymmetry(&xi, &m, 1e-10);
            assert!(v.ok, "r={r} th={th}: {v:?}");
            // eigenvalues of eta*xi are sqrt(1+r^2) +- r
            let ex = m.eta() * &xi;
            let eig = herm_eig(&ex, 1e-12).unwrap();
            let s = (1.0 + r * r).sqrt();
            assert!((eig.values[0] - (s - r)).abs() < 1e-12);
            assert!((eig.values[1] - (s + r)).abs() < 1e-12);
        }
    }

    #[test]
    fn q_of_trivial_is_zero_and_g_is_identity() {
        let m = metric2();
        let xi = CSymmetry::trivial(m);
        let q = q_from_xi(&xi).unwrap();
        assert!(q.norm_fro() < 1e-12);
        let g = g_from_xi(&xi).unwrap();
        assert!(g.identity_residual() < 1e-12);
    }

    #[test]
    fn generator_exponential_matches_closed_form() {
        // xi built from the rank-one generator equals the family at sinh(r)
        let m = metric2();
        for (r, th) in [(0.3, 0.4), (1.1, -2.0)] {
            let xi = xi_from_q(&q2(r, th), &m, 1e-10).unwrap();
            let expected = xi2(r.sinh(), th);
            assert!(
                (xi.xi() - &expected).norm_fro() < 1e-10,
                "r={r} th={th}: residual {}",
                (xi.xi() - &expected).norm_fro()
            );
        }
    }

    #[test]
    fn bijection_round_trips() {
        let m = metric2();
        for (r, th) in [(0.2, 0.0), (0.9, 2.2), (1.7, -1.0)] {
            let q = q2(r, th);
            let xi = xi_from_q(&q, &m, 1e-10).unwrap();
            let q_back = q_from_xi(&xi).unwrap();
            assert!((&q_back - &q).norm_fro() < 1e-9);

            let xi0 = CSymmetry::new(xi2(r, th), m.clone(), 1e-10).unwrap();
            let xi_back = xi_from_q(&q_from_xi(&xi0).unwrap(), &m, 1e-9).unwrap();
            assert!((xi_back.xi() - xi0.xi()).norm_fro() < 1e-9);
        }
    }

    #[test]
    fn xi_from_q_rejects_bad_generators() {
        let m = metric2();
        // not anticommuting with eta
        let q = ComplexMatrix::diag_real(&[1.0, 2.0]);
        match xi_from_q(&q, &m, 1e-10) {
            Err(CsymError::NotInRSpace { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        // not hermitian
        let q = ComplexMatrix::from_rows(2, &[c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)]);
        match xi_from_q(&q, &m, 1e-10) {
            Err(CsymError::NotInRSpace { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn g_conjugates_xi_to_eta() {
        let m = metric2();
        let xi = CSymmetry::new(xi2(1.0, 0.0), m.clone(), 1e-10).unwrap();
        let g = g_from_xi(&xi).unwrap();
        // g^2 = eta xi
        let ex = m.eta() * xi.xi();
        assert!((&(&g * &g) - &ex).norm_fro() < 1e-10);
        // g hermitian, eta-unitary
        assert!(g.herm_residual() < 1e-12);
        let g_inv = &(m.eta() * &g) * m.eta();
        assert!((&(&g * &g_inv) - &ComplexMatrix::identity(2)).norm_fro() < 1e-10);
        // g xi g^-1 = eta
        let conj = &(&g * xi.xi()) * &g_inv;
        assert!((&conj - m.eta()).norm_fro() < 1e-9);
    }

    fn fixture_metric() -> KreinMetric {
        KreinMetric::standard(2, 2)
    }

    fn fixture_h() -> ComplexMatrix {
        ComplexMatrix::from_rows(
            4,
            &[
                c(1.2081617629590178, 9.020562075079397e-17),
                c(-0.23390982931773657, 0.22138001894969245),
                c(0.5030409608971228, 0.6830332635036949),
                c(-0.1222557364364023, 0.027001046332833623),
                c(-0.2339098293177368, -0.22138001894969236),
                c(3.615501846640089, -2.5673907444456745e-16),
                c(0.27682338550842883, -1.4073999578702754),
                c(0.8725133966192468, 0.29756266155161687),
                c(-0.5030409608971232, 0.6830332635036949),
                c(-0.2768233855084287, -1.407399957870276),
                c(-2.544668452285045, -4.2327252813834093e-16),
                c(0.06970465101859986, -0.36202616209304894),
                c(0.1222557364364031, 0.0270010463328341),
                c(-0.8725133966192445, 0.29756266155161654),
                c(0.06970465101859982, 0.36202616209304866),
                c(0.22100484268593895, 2.7755575615628914e-17),
            ],
        )
    }

    fn fixture_xi() -> ComplexMatrix {
        ComplexMatrix::from_rows(
            4,
            &[
                c(1.154486639557012, 0.0),
                c(-0.15682623964342135, 0.12437943144133427),
                c(0.3300932757846445, 0.449444565147072),
                c(-0.24848878603077793, 0.013980296151318754),
                c(-0.15682623964342135, -0.12437943144133426),
                c(1.3545752901365495, 0.0),
                c(0.11236114128676827, -0.5897662987364778),
                c(0.6790599513735698, 0.23101341584162974),
                c(-0.33009327578464454, 0.449444565147072),
                c(-0.11236114128676819, -0.5897662987364777),
                c(-1.273458269631332, 0.0),
                c(0.05407801367014527, -0.21631205468058098),
                c(0.24848878603077798, 0.013980296151318702),
                c(-0.6790599513735699, 0.2310134158416298),
                c(0.05407801367014529, 0.21631205468058107),
                c(-1.2356036600622302, 0.0),
            ],
        )
    }

    #[test]
    fn find_csymmetry_matches_frozen_instance() {
        // 4x4 stable operator with distinct eigenvalues {1, 3, -2, 0.5}:
        // the commuting C-symmetry is unique, so the output is pinned
        let m = fixture_metric();
        let h = fixture_h();
        let xi = find_csymmetry(&h, &m, 1e-9).unwrap();
        let res = (xi.xi() - &fixture_xi()).norm_fro();
        assert!(res < 1e-8, "residual {res}");
        // commutes with h
        let comm = (&(&h * xi.xi()) - &(xi.xi() * &h)).norm_fro();
        assert!(comm < 1e-9);
    }

    #[test]
    fn find_csymmetry_on_two_dim_family() {
        // h = u + v*xi has eigenvalues u +- v; for v != 0 the unique
        // commuting C-symmetry is the family member itself
        let m = metric2();
        let (r, th, u, v) = (0.8, 0.5, 0.3, 1.2);
        let xim = xi2(r, th);
        let h = &ComplexMatrix::identity(2).scaled(c(u, 0.0)) + &xim.scaled(c(v, 0.0));
        let found = find_csymmetry(&h, &m, 1e-9).unwrap();
        assert!((found.xi() - &xim).norm_fro() < 1e-9);
    }

    #[test]
    fn find_csymmetry_detects_defective() {
        // rank-one nilpotent: double eigenvalue zero, one eigenvector
        let m = metric2();
        let h = ComplexMatrix::from_rows(2, &[c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0)]);
        match find_csymmetry(&h, &m, 1e-9) {
            Err(CsymError::NotDynamicallyStable {
                obstruction: Obstruction::DefectiveEigenvalue { .. },
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn find_csymmetry_detects_complex_spectrum() {
        let m = metric2();
        // eta-self-adjoint with eigenvalues +-i
        let h = ComplexMatrix::from_rows(2, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        match find_csymmetry(&h, &m, 1e-9) {
            Err(CsymError::NotDynamicallyStable {
                obstruction: Obstruction::NonRealEigenvalue { .. },
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn find_csymmetry_rejects_non_selfadjoint() {
        let m = metric2();
        let h = ComplexMatrix::from_rows(2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        match find_csymmetry(&h, &m, 1e-9) {
            Err(CsymError::NotEtaSelfAdjoint { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn find_csymmetry_handles_degenerate_diagonalizable() {
        // h = G^-1 diag(2, 2, -1, 0.5) G with a 2-dim eigenvalue cluster
        let m = fixture_metric();
        let q = ComplexMatrix::from_rows(
            4,
            &[
                c(0.0, 0.0), c(0.0, 0.0), c(0.3, 0.4), c(-0.2, 0.0),
                c(0.0, 0.0), c(0.0, 0.0), c(0.1, -0.5), c(0.6, 0.2),
                c(0.3, -0.4), c(0.1, 0.5), c(0.0, 0.0), c(0.0, 0.0),
                c(-0.2, 0.0), c(0.6, -0.2), c(0.0, 0.0), c(0.0, 0.0),
            ],
        );
        let qe = herm_eig(&q, 1e-12).unwrap();
        let g = qe.assemble(|x| (x / 2.0).exp());
        let g_inv = qe.assemble(|x| (-x / 2.0).exp());
        let d = ComplexMatrix::diag_real(&[2.0, 2.0, -1.0, 0.5]);
        let h = &(&g_inv * &d) * &g;
        let xi = find_csymmetry(&h, &m, 1e-9).unwrap();
        let comm = (&(&h * xi.xi()) - &(xi.xi() * &h)).norm_fro();
        assert!(comm < 1e-8, "commutator residual {comm}");
        let cert = reduce_hamiltonian(&h, &xi, 1e-8).unwrap();
        assert!(cert.h_tilde.herm_residual() < 1e-8);
        assert!(certificate_isospectral(&cert, &h, 1e-7));
    }

    #[test]
    fn reduce_hamiltonian_certificate_contract() {
        let m = fixture_metric();
        let h = fixture_h();
        let xi = find_csymmetry(&h, &m, 1e-9).unwrap();
        let cert = reduce_hamiltonian(&h, &xi, 1e-8).unwrap();
        // g hermitian, eta-unitary, conjugates xi to eta
        assert!(cert.g.herm_residual() < 1e-10);
        let gi = cert.g_inv();
        assert!((&(&cert.g * &gi) - &ComplexMatrix::identity(4)).norm_fro() < 1e-9);
        let conj = &(&cert.g * cert.xi.xi()) * &gi;
        assert!((&conj - m.eta()).norm_fro() < 1e-9);
        // h_tilde hermitian and commuting with eta
        assert!(cert.h_tilde.herm_residual() < 1e-9);
        let comm = (&(&cert.h_tilde * m.eta()) - &(m.eta() * &cert.h_tilde)).norm_fro();
        assert!(comm < 1e-9);
        assert!(certificate_isospectral(&cert, &h, 1e-8));
    }

    #[test]
    fn reduce_two_dim_closed_form() {
        // h = u + v*xi reduces to diag(u+v, u-v)
        let m = metric2();
        let (r, th, u, v) = (1.3, -0.9, 0.25, 2.0);
        let xim = xi2(r, th);
        let xi = CSymmetry::new(xim.clone(), m.clone(), 1e-10).unwrap();
        let h = &ComplexMatrix::identity(2).scaled(c(u, 0.0)) + &xim.scaled(c(v, 0.0));
        let cert = reduce_hamiltonian(&h, &xi, 1e-9).unwrap();
        let expected = ComplexMatrix::diag_real(&[u + v, u - v]);
        assert!((&cert.h_tilde - &expected).norm_fro() < 1e-9);
    }

    #[test]
    fn reduce_rejects_non_commuting() {
        let m = metric2();
        let xi = CSymmetry::new(xi2(1.0, 0.0), m.clone(), 1e-10).unwrap();
        // eta-self-adjoint but does not commute with xi
        let h = ComplexMatrix::diag_real(&[1.0, 2.0]);
        match reduce_hamiltonian(&h, &xi, 1e-9) {
            Err(CsymError::DoesNotCommuteWithXi { .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn trivial_reduction_is_identity_map() {
        let m = fixture_metric();
        // hermitian, commutes with eta (block diagonal)
        let h = ComplexMatrix::diag_real(&[1.0, -0.5, 2.0, 0.25]);
        let xi = CSymmetry::trivial(m);
        let cert = reduce_hamiltonian(&h, &xi, 1e-10).unwrap();
        assert!((&cert.h_tilde - &h).norm_fro() < 1e-12);
        assert!(cert.g.identity_residual() < 1e-12);
    }

    #[test]
    fn functional_calculus_identity_and_time_zero() {
        let m = fixture_metric();
        let h = fixture_h();
        let xi = find_csymmetry(&h, &m, 1e-9).unwrap();
        let id = stable_functional_calculus(&h, &xi, StableFun::Real(&|x| x), 1e-8).unwrap();
        assert!((&id - &h).norm_fro() < 1e-8);
        let v0 = stable_functional_calculus(&h, &xi, StableFun::Time(0.0), 1e-8).unwrap();
        assert!(v0.identity_residual() < 1e-10);
    }

    #[test]
    fn propagator_is_eta_unitary_with_group_law() {
        let m = fixture_metric();
        let h = fixture_h();
        let xi = find_csymmetry(&h, &m, 1e-9).unwrap();
        let eta = m.eta();
        for t in [0.1, 1.0, 10.0] {
            let vt = stable_functional_calculus(&h, &xi, StableFun::Time(t), 1e-8).unwrap();
            // vt# vt = 1
            let sharp = &(eta * &vt.adjoint()) * eta;
            assert!(
                (&(&sharp * &vt) - &ComplexMatrix::identity(4)).norm_fro() < 1e-9,
                "t = {t}"
            );
        }
        let va = stable_functional_calculus(&h, &xi, StableFun::Time(0.4), 1e-8).unwrap();
        let vb = stable_functional_calculus(&h, &xi, StableFun::Time(0.7), 1e-8).unwrap();
        let vab = stable_functional_calculus(&h, &xi, StableFun::Time(1.1), 1e-8).unwrap();
        assert!((&(&va * &vb) - &vab).norm_fro() < 1e-8);
    }

    #[test]
    fn calculus_commutes_with_input() {
        let m = fixture_metric();
        let h = fixture_h();
        let xi = find_csymmetry(&h, &m, 1e-9).unwrap();
        let f = stable_functional_calculus(&h, &xi, StableFun::Real(&|x| x * x - 1.0), 1e-8).unwrap();
        let comm = (&(&f * &h) - &(&h * &f)).norm_fro();
        assert!(comm < 1e-8);
    }
}
