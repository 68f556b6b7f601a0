//! Finite groups with sign characters and 2-cocycles, projective
//! unitary/anti-unitary representations, Clifford actions, and the
//! reduction pipeline that turns an indefinite-metric symmetry datum into a
//! plain one on a doubled group. The endpoint is `kgroup_point`, which
//! grinds a small scenario through reduction, generator absorption, minimal
//! graded module construction and an odd-extension test, and reports the
//! resulting abelian group as "Z", "0" or "Z+Z".
//!
//! Cocycle values are kept exact on the fourth roots of unity so that
//! involutions like the hat twist are bit-stable under repeated
//! application; everything else falls back to floating phases.

use std::fmt;

use thiserror::Error;

use crate::gradekit::Gradation;
use crate::krein::{KreinError, KreinMetric, RealLinearOp};
use crate::numkit::{c64, herm_eig, ComplexMatrix, NumError};

#[derive(Debug, Error)]
pub enum TwistError {
    #[error("malformed data: {0}")]
    BadShape(String),
    #[error("no two-sided unit in the multiplication table")]
    NoUnit,
    #[error("multiplication table is not associative at ({0}, {1}, {2})")]
    NotAssociative(usize, usize, usize),
    #[error("element {0} has no inverse")]
    NotInvertible(usize),
    #[error("input twist is invalid: {0}")]
    InvalidInput(TwistFailure),
    #[error("no Clifford generators left to absorb")]
    NoGenerators,
    #[error("distinguished involution is a scalar; nothing to reduce")]
    Reducible,
    #[error("distinguished involution has unbalanced signature ({plus}, {minus})")]
    Unbalanced { plus: usize, minus: usize },
    #[error("unsupported scenario: {0}")]
    UnsupportedScenario(String),
    #[error("clifford action violates {relation} (residual {residual:.3e})")]
    BadAction { relation: String, residual: f64 },
    #[error(transparent)]
    Numeric(#[from] NumError),
    #[error(transparent)]
    Metric(#[from] KreinError),
}

// ---------------------------------------------------------------------------
// Phases
// ---------------------------------------------------------------------------

/// A unit-modulus scalar. Values on the fourth roots of unity are stored as
/// the exponent of i and multiply exactly; anything else is a raw complex
/// number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phase {
    Exact(u8),
    Float(c64),
}

impl Phase {
    pub const ONE: Phase = Phase::Exact(0);
    pub const I: Phase = Phase::Exact(1);
    pub const MINUS_ONE: Phase = Phase::Exact(2);

    pub fn from_sign(s: i8) -> Phase {
        if s >= 0 { Phase::Exact(0) } else { Phase::Exact(2) }
    }

    /// Snaps to an exact fourth root of unity when within 1e-12 of one.
    pub fn from_value(z: c64) -> Phase {
        for k in 0..4u8 {
            if (z - Phase::Exact(k).value()).norm() <= 1e-12 {
                return Phase::Exact(k);
            }
        }
        Phase::Float(z)
    }

    pub fn value(self) -> c64 {
        match self {
            Phase::Exact(0) => c64::new(1.0, 0.0),
            Phase::Exact(1) => c64::new(0.0, 1.0),
            Phase::Exact(2) => c64::new(-1.0, 0.0),
            Phase::Exact(3) => c64::new(0.0, -1.0),
            Phase::Exact(k) => Phase::Exact(k % 4).value(),
            Phase::Float(z) => z,
        }
    }

    pub fn mul(self, other: Phase) -> Phase {
        match (self, other) {
            (Phase::Exact(a), Phase::Exact(b)) => Phase::Exact((a + b) % 4),
            _ => Phase::from_value(self.value() * other.value()),
        }
    }

    /// Complex conjugate; for unit modulus this is also the inverse.
    pub fn conj(self) -> Phase {
        match self {
            Phase::Exact(k) => Phase::Exact((4 - k % 4) % 4),
            Phase::Float(z) => Phase::Float(z.conj()),
        }
    }

    pub fn neg(self) -> Phase {
        self.mul(Phase::MINUS_ONE)
    }

    /// The ±1 content, if this phase is exactly a sign.
    pub fn as_sign(self) -> Option<i8> {
        match self {
            Phase::Exact(0) => Some(1),
            Phase::Exact(2) => Some(-1),
            _ => None,
        }
    }

    pub fn approx_eq(self, other: Phase, tol: f64) -> bool {
        (self.value() - other.value()).norm() <= tol
    }

    pub fn modulus_error(self) -> f64 {
        (self.value().norm() - 1.0).abs()
    }
}

// ---------------------------------------------------------------------------
// Finite groups
// ---------------------------------------------------------------------------

/// A finite group as a labeled multiplication table. Construction checks
/// the axioms exhaustively.
#[derive(Debug, Clone)]
pub struct FiniteGroupData {
    labels: Vec<String>,
    table: Vec<usize>,
    unit: usize,
}

impl FiniteGroupData {
    pub fn new(labels: Vec<String>, table: Vec<usize>) -> Result<FiniteGroupData, TwistError> {
        let n = labels.len();
        if n == 0 {
            return Err(TwistError::BadShape("a group needs at least one element".into()));
        }
        if table.len() != n * n {
            return Err(TwistError::BadShape(format!(
                "multiplication table has {} entries, expected {}",
                table.len(),
                n * n
            )));
        }
        if let Some(bad) = table.iter().find(|&&v| v >= n) {
            return Err(TwistError::BadShape(format!(
                "table entry {bad} is out of range for order {n}"
            )));
        }
        let mul = |a: usize, b: usize| table[a * n + b];
        let unit = (0..n)
            .find(|&e| (0..n).all(|a| mul(e, a) == a && mul(a, e) == a))
            .ok_or(TwistError::NoUnit)?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                        return Err(TwistError::NotAssociative(a, b, c));
                    }
                }
            }
        }
        for a in 0..n {
            if !(0..n).any(|b| mul(a, b) == unit && mul(b, a) == unit) {
                return Err(TwistError::NotInvertible(a));
            }
        }
        Ok(FiniteGroupData { labels, table, unit })
    }

    pub fn trivial() -> FiniteGroupData {
        FiniteGroupData { labels: vec!["e".into()], table: vec![0], unit: 0 }
    }

    pub fn cyclic2() -> FiniteGroupData {
        FiniteGroupData {
            labels: vec!["+1".into(), "-1".into()],
            table: vec![0, 1, 1, 0],
            unit: 0,
        }
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order() + b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        (0..self.order())
            .find(|&b| self.mul(a, b) == self.unit && self.mul(b, a) == self.unit)
            .expect("validated group")
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    /// Direct product with a sign group. Element (g, ε) sits at index g for
    /// ε = +1 and g + order for ε = −1, so the original indices survive.
    /// Axioms hold by construction, no re-check.
    fn extend_by_sign(&self) -> FiniteGroupData {
        let n = self.order();
        let mut labels = Vec::with_capacity(2 * n);
        for tag in ["+1", "-1"] {
            for l in &self.labels {
                labels.push(format!("({l},{tag})"));
            }
        }
        let mut table = vec![0usize; 4 * n * n];
        for a in 0..2 * n {
            for b in 0..2 * n {
                let prod = self.mul(a % n, b % n);
                let flip = (a >= n) ^ (b >= n);
                table[a * 2 * n + b] = prod + if flip { n } else { 0 };
            }
        }
        FiniteGroupData { labels, table, unit: self.unit }
    }

    /// True when this group has the index layout produced by
    /// `extend_by_sign` over a base of half the order.
    fn is_sign_extension(&self) -> bool {
        let m = self.order();
        if m % 2 != 0 || self.unit >= m / 2 {
            return false;
        }
        let n = m / 2;
        for a in 0..m {
            for b in 0..m {
                let prod = self.mul(a % n, b % n);
                if prod >= n {
                    return false;
                }
                let flip = (a >= n) ^ (b >= n);
                if self.mul(a, b) != prod + if flip { n } else { 0 } {
                    return false;
                }
            }
        }
        true
    }
}

// ---------------------------------------------------------------------------
// Twist data
// ---------------------------------------------------------------------------

/// A finite group dressed with three sign characters (linearity ϖ, metric
/// sign ℘, grading c) and a unit-modulus 2-cocycle τ.
#[derive(Debug, Clone)]
pub struct TwistData {
    group: FiniteGroupData,
    varpi: Vec<i8>,
    wp: Vec<i8>,
    c: Vec<i8>,
    tau: Vec<Phase>,
}

impl TwistData {
    pub fn new(
        group: FiniteGroupData,
        varpi: Vec<i8>,
        wp: Vec<i8>,
        c: Vec<i8>,
        tau: Vec<Phase>,
    ) -> Result<TwistData, TwistError> {
        let n = group.order();
        for (name, map) in [("varpi", &varpi), ("wp", &wp), ("c", &c)] {
            if map.len() != n {
                return Err(TwistError::BadShape(format!(
                    "{name} has {} entries, expected {n}",
                    map.len()
                )));
            }
            if map.iter().any(|s| *s != 1 && *s != -1) {
                return Err(TwistError::BadShape(format!("{name} takes values outside ±1")));
            }
        }
        if tau.len() != n * n {
            return Err(TwistError::BadShape(format!(
                "cocycle table has {} entries, expected {}",
                tau.len(),
                n * n
            )));
        }
        Ok(TwistData { group, varpi, wp, c, tau })
    }

    /// All characters trivial, cocycle identically one.
    pub fn untwisted(group: FiniteGroupData) -> TwistData {
        let n = group.order();
        TwistData {
            group,
            varpi: vec![1; n],
            wp: vec![1; n],
            c: vec![1; n],
            tau: vec![Phase::ONE; n * n],
        }
    }

    pub fn group(&self) -> &FiniteGroupData {
        &self.group
    }

    pub fn varpi(&self, g: usize) -> i8 {
        self.varpi[g]
    }

    pub fn wp(&self, g: usize) -> i8 {
        self.wp[g]
    }

    pub fn c(&self, g: usize) -> i8 {
        self.c[g]
    }

    pub fn tau(&self, g: usize, h: usize) -> Phase {
        self.tau[g * self.group.order() + h]
    }

    pub fn set_wp(&mut self, map: Vec<i8>) {
        assert_eq!(map.len(), self.group.order());
        self.wp = map;
    }

    pub fn set_c(&mut self, map: Vec<i8>) {
        assert_eq!(map.len(), self.group.order());
        self.c = map;
    }

    pub fn set_varpi(&mut self, map: Vec<i8>) {
        assert_eq!(map.len(), self.group.order());
        self.varpi = map;
    }

    pub fn set_tau(&mut self, g: usize, h: usize, value: Phase) {
        let n = self.group.order();
        self.tau[g * n + h] = value;
    }
}

/// What `validate_twist` found, if anything. Only the first failure is
/// reported; the scan order is fixed (modulus, characters, normalization,
/// cocycle identity over lexicographic triples).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwistFailure {
    #[error("τ({g1},{g2}) is not unit modulus")]
    NotUnitModulus { g1: usize, g2: usize },
    #[error("{map} is not a homomorphism at ({g1},{g2})")]
    NotHomomorphism { map: &'static str, g1: usize, g2: usize },
    #[error("τ is not normalized at element {g}")]
    NotNormalized { g: usize },
    #[error("cocycle identity fails at ({g1},{g2},{g3})")]
    CocycleIdentity { g1: usize, g2: usize, g3: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwistVerdict {
    pub ok: bool,
    pub failure: Option<TwistFailure>,
}

/// Exhaustive check of every structural identity of a twist datum: the
/// three characters are homomorphisms, τ has unit modulus, τ(g,e) = τ(e,g)
/// = 1, and the ϖ-twisted 2-cocycle identity
/// τ(g₁,g₂) τ(g₁g₂,g₃) = τ(g₂,g₃)^{ϖ(g₁)} τ(g₁,g₂g₃) holds for all triples.
pub fn validate_twist(t: &TwistData) -> TwistVerdict {
    let n = t.group.order();
    let e = t.group.unit();
    let tol = 1e-9;
    let fail = |f| TwistVerdict { ok: false, failure: Some(f) };

    for g1 in 0..n {
        for g2 in 0..n {
            if t.tau(g1, g2).modulus_error() > tol {
                return fail(TwistFailure::NotUnitModulus { g1, g2 });
            }
        }
    }
    for (name, map) in [("varpi", &t.varpi), ("wp", &t.wp), ("c", &t.c)] {
        for g1 in 0..n {
            for g2 in 0..n {
                if map[t.group.mul(g1, g2)] != map[g1] * map[g2] {
                    return fail(TwistFailure::NotHomomorphism { map: name, g1, g2 });
                }
            }
        }
    }
    for g in 0..n {
        if !t.tau(g, e).approx_eq(Phase::ONE, tol) || !t.tau(e, g).approx_eq(Phase::ONE, tol) {
            return fail(TwistFailure::NotNormalized { g });
        }
    }
    for g1 in 0..n {
        for g2 in 0..n {
            for g3 in 0..n {
                let lhs = t.tau(g1, g2).mul(t.tau(t.group.mul(g1, g2), g3));
                let acted = if t.varpi(g1) < 0 { t.tau(g2, g3).conj() } else { t.tau(g2, g3) };
                let rhs = acted.mul(t.tau(g1, t.group.mul(g2, g3)));
                if !lhs.approx_eq(rhs, tol) {
                    return fail(TwistFailure::CocycleIdentity { g1, g2, g3 });
                }
            }
        }
    }
    TwistVerdict { ok: true, failure: None }
}

/// Absorbs the metric sign into a doubled group: the output lives on
/// G×ℤ₂ with τ′((g₁,ε₁),(g₂,ε₂)) = ℘(g₂)^{(1−ε₁)/2} τ(g₁,g₂), carries
/// ϖ and c unchanged along the projection, and has trivial ℘.
pub fn reduce_data(t: &TwistData) -> Result<TwistData, TwistError> {
    let v = validate_twist(t);
    if let Some(f) = v.failure {
        return Err(TwistError::InvalidInput(f));
    }
    let n = t.group.order();
    let group = t.group.extend_by_sign();
    let mut varpi = Vec::with_capacity(2 * n);
    let mut c = Vec::with_capacity(2 * n);
    for block in 0..2 {
        let _ = block;
        for g in 0..n {
            varpi.push(t.varpi(g));
            c.push(t.c(g));
        }
    }
    let mut tau = vec![Phase::ONE; 4 * n * n];
    for a in 0..2 * n {
        for b in 0..2 * n {
            let base = t.tau(a % n, b % n);
            let sign = if a >= n { t.wp(b % n) } else { 1 };
            tau[a * 2 * n + b] = base.mul(Phase::from_sign(sign));
        }
    }
    TwistData::new(group, varpi, vec![1; 2 * n], c, tau)
}

/// Trades the last declared Clifford generator for a ℤ₂ group factor. The
/// generator squares to −1 while `s > 0` (those are absorbed first) and to
/// +1 afterwards; it is odd, so the grading extends as c′((g,ε)) = ε·c(g),
/// and the product rule forced by the Koszul relation gives
/// τ′((g₁,ε₁),(g₂,ε₂)) = c(g₂)^{(1−ε₁)/2} κ^{(1−ε₁)(1−ε₂)/4} τ(g₁,g₂)
/// with κ the square of the absorbed generator.
pub fn clifford_absorb(
    t: &TwistData,
    signature: (usize, usize),
) -> Result<(TwistData, (usize, usize)), TwistError> {
    let (r, s) = signature;
    if r + s == 0 {
        return Err(TwistError::NoGenerators);
    }
    let (kappa, remaining) = if s > 0 { (-1i8, (r, s - 1)) } else { (1i8, (r - 1, s)) };
    let n = t.group.order();
    let group = t.group.extend_by_sign();
    let mut varpi = Vec::with_capacity(2 * n);
    let mut wp = Vec::with_capacity(2 * n);
    let mut c = Vec::with_capacity(2 * n);
    for block in 0..2i8 {
        for g in 0..n {
            varpi.push(t.varpi(g));
            wp.push(t.wp(g));
            c.push(if block == 0 { t.c(g) } else { -t.c(g) });
        }
    }
    let mut tau = vec![Phase::ONE; 4 * n * n];
    for a in 0..2 * n {
        for b in 0..2 * n {
            let mut p = t.tau(a % n, b % n);
            if a >= n {
                p = p.mul(Phase::from_sign(t.c(b % n)));
                if b >= n {
                    p = p.mul(Phase::from_sign(kappa));
                }
            }
            tau[a * 2 * n + b] = p;
        }
    }
    Ok((TwistData::new(group, varpi, wp, c, tau)?, remaining))
}

/// The hat involution: flips the sign of τ(g₁,g₂) exactly when both
/// arguments are odd for the grading. Applying it twice restores the input
/// bit for bit.
pub fn tau_hat(t: &TwistData) -> TwistData {
    let n = t.group.order();
    let mut out = t.clone();
    for g1 in 0..n {
        for g2 in 0..n {
            if t.c(g1) < 0 && t.c(g2) < 0 {
                out.set_tau(g1, g2, t.tau(g1, g2).neg());
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Projective unitary/anti-unitary representations
// ---------------------------------------------------------------------------

/// Images of group elements under a projective rep: ρ(g₁)ρ(g₂) =
/// τ(g₁,g₂) ρ(g₁g₂), with the linearity tag of ρ(g) following ϖ(g).
#[derive(Debug, Clone)]
pub struct PuaRep {
    twist: TwistData,
    images: Vec<RealLinearOp>,
}

impl PuaRep {
    pub fn new(twist: TwistData, images: Vec<RealLinearOp>) -> Result<PuaRep, TwistError> {
        if images.len() != twist.group().order() {
            return Err(TwistError::BadShape(format!(
                "{} images for a group of order {}",
                images.len(),
                twist.group().order()
            )));
        }
        let d = images[0].dim();
        if images.iter().any(|op| op.dim() != d) {
            return Err(TwistError::BadShape("images have mixed dimensions".into()));
        }
        Ok(PuaRep { twist, images })
    }

    pub fn twist(&self) -> &TwistData {
        &self.twist
    }

    pub fn image(&self, g: usize) -> &RealLinearOp {
        &self.images[g]
    }

    pub fn images(&self) -> &[RealLinearOp] {
        &self.images
    }

    pub fn dim(&self) -> usize {
        self.images[0].dim()
    }
}

/// Residual table from checking a projective rep against its twist:
/// unitarity per element, the product rule per pair, and optionally the
/// metric intertwining and the Koszul rule against a Clifford action.
#[derive(Debug, Clone)]
pub struct PuaVerdict {
    pub ok: bool,
    pub tags_ok: bool,
    pub unitarity: Vec<f64>,
    pub product: Vec<f64>,
    pub metric: Option<Vec<f64>>,
    pub koszul: Option<Vec<f64>>,
    pub grading: Option<Vec<f64>>,
}

impl PuaVerdict {
    pub fn worst(&self) -> f64 {
        let mut w = if self.tags_ok { 0.0 } else { f64::INFINITY };
        for r in self.unitarity.iter().chain(&self.product) {
            w = w.max(*r);
        }
        for block in [&self.metric, &self.koszul, &self.grading].into_iter().flatten() {
            for r in block {
                w = w.max(*r);
            }
        }
        w
    }
}

/// Checks every defining relation of a projective rep, exhaustively over
/// group elements. With a metric, also checks ρ(g)η = ℘(g) η ρ(g); with a
/// Clifford action, also the Koszul rule γρ(g) = c(g) ρ(g) γ and the
/// grading intertwining Γρ(g) = c(g) ρ(g) Γ.
pub fn verify_pua(
    rep: &PuaRep,
    metric: Option<&KreinMetric>,
    clifford: Option<&CliffordAction>,
    tol: f64,
) -> PuaVerdict {
    let t = rep.twist();
    let n = t.group().order();
    let d = rep.dim();
    let scale = rep
        .images
        .iter()
        .map(|op| op.mat.norm_fro())
        .fold(1.0, f64::max);

    let tags_ok = (0..n).all(|g| rep.image(g).varpi == t.varpi(g));
    let unitarity: Vec<f64> = (0..n)
        .map(|g| (&(&rep.image(g).mat.adjoint() * &rep.image(g).mat) - &ComplexMatrix::identity(d)).norm_fro())
        .collect();
    let mut product = Vec::with_capacity(n * n);
    for g1 in 0..n {
        for g2 in 0..n {
            let lhs = rep.image(g1).compose(rep.image(g2));
            let mut rhs = rep.image(t.group().mul(g1, g2)).clone();
            rhs.mat = rhs.mat.scaled(t.tau(g1, g2).value());
            product.push(lhs.distance(&rhs));
        }
    }
    let metric_res = metric.map(|m| {
        if m.dim() != d {
            return vec![f64::INFINITY; n];
        }
        let eta_op = RealLinearOp::linear(m.eta().clone());
        (0..n)
            .map(|g| {
                let lhs = rep.image(g).compose(&eta_op);
                let mut rhs = eta_op.compose(rep.image(g));
                rhs.mat = rhs.mat.scaled(c64::new(t.wp(g) as f64, 0.0));
                lhs.distance(&rhs)
            })
            .collect()
    });
    let (koszul, grading) = match clifford {
        None => (None, None),
        Some(action) => {
            if action.dim() != d {
                (Some(vec![f64::INFINITY]), Some(vec![f64::INFINITY]))
            } else {
                let mut k = Vec::new();
                for gamma in action.generators() {
                    let gamma_op = RealLinearOp::linear(gamma.clone());
                    for g in 0..n {
                        let lhs = gamma_op.compose(rep.image(g));
                        let mut rhs = rep.image(g).compose(&gamma_op);
                        rhs.mat = rhs.mat.scaled(c64::new(t.c(g) as f64, 0.0));
                        k.push(lhs.distance(&rhs));
                    }
                }
                let gamma_op = RealLinearOp::linear(action.grading().gamma().clone());
                let gr = (0..n)
                    .map(|g| {
                        let lhs = gamma_op.compose(rep.image(g));
                        let mut rhs = rep.image(g).compose(&gamma_op);
                        rhs.mat = rhs.mat.scaled(c64::new(t.c(g) as f64, 0.0));
                        lhs.distance(&rhs)
                    })
                    .collect();
                (Some(k), Some(gr))
            }
        }
    };

    let thresh = tol * scale * scale;
    let ok = tags_ok
        && unitarity.iter().all(|r| *r <= thresh)
        && product.iter().all(|r| *r <= thresh)
        && metric_res.as_ref().map_or(true, |v| v.iter().all(|r| *r <= thresh))
        && koszul.as_ref().map_or(true, |v| v.iter().all(|r| *r <= thresh))
        && grading.as_ref().map_or(true, |v| v.iter().all(|r| *r <= thresh));
    PuaVerdict { ok, tags_ok, unitarity, product, metric: metric_res, koszul, grading }
}

/// Extends a metric-intertwining rep of G to a plain rep of G×ℤ₂ by
/// sending (g, −1) to ρ(g)η. The extended twist is exactly `reduce_data`
/// of the input twist.
pub fn krein_to_hilbert(rep: &PuaRep, metric: &KreinMetric) -> Result<PuaRep, TwistError> {
    if metric.dim() != rep.dim() {
        return Err(TwistError::BadShape(format!(
            "metric dimension {} vs rep dimension {}",
            metric.dim(),
            rep.dim()
        )));
    }
    let reduced = reduce_data(rep.twist())?;
    let eta_op = RealLinearOp::linear(metric.eta().clone());
    let mut images = rep.images.to_vec();
    for g in 0..rep.twist().group().order() {
        images.push(rep.image(g).compose(&eta_op));
    }
    PuaRep::new(reduced, images)
}

/// Inverse of `krein_to_hilbert`: reads the metric off the image of
/// (e, −1) and restricts to the first factor, recovering ℘ from the
/// extended cocycle. The distinguished image must be a non-scalar
/// involution with balanced signature.
pub fn hilbert_to_krein(rep: &PuaRep) -> Result<(PuaRep, KreinMetric), TwistError> {
    let ext = rep.twist();
    if !ext.group().is_sign_extension() {
        return Err(TwistError::BadShape(
            "group does not carry the doubled-index layout of a sign extension".into(),
        ));
    }
    let n = ext.group().order() / 2;
    let u = ext.group().unit() + n;
    let eta_img = rep.image(u);
    if eta_img.varpi != 1 {
        return Err(TwistError::BadShape("distinguished involution must be linear".into()));
    }
    let eta = eta_img.mat.clone();
    let d = eta.dim();
    if (&eta - &ComplexMatrix::identity(d)).norm_fro() <= 1e-9
        || (&eta + &ComplexMatrix::identity(d)).norm_fro() <= 1e-9
    {
        return Err(TwistError::Reducible);
    }
    let metric = KreinMetric::new(eta, 1e-9)?;
    if metric.kappa_plus() != metric.kappa_minus() {
        return Err(TwistError::Unbalanced {
            plus: metric.kappa_plus(),
            minus: metric.kappa_minus(),
        });
    }
    let labels: Vec<String> = (0..n).map(|g| ext.group().label(g).to_string()).collect();
    let mut table = vec![0usize; n * n];
    for a in 0..n {
        for b in 0..n {
            table[a * n + b] = ext.group().mul(a, b);
        }
    }
    let base_group = FiniteGroupData::new(labels, table)?;
    let mut wp = Vec::with_capacity(n);
    for g in 0..n {
        match ext.tau(u, g).as_sign() {
            Some(s) => wp.push(s),
            None => {
                return Err(TwistError::BadShape(
                    "extended cocycle does not encode a metric sign".into(),
                ))
            }
        }
    }
    let varpi: Vec<i8> = (0..n).map(|g| ext.varpi(g)).collect();
    let c: Vec<i8> = (0..n).map(|g| ext.c(g)).collect();
    let mut tau = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            tau.push(ext.tau(a, b));
        }
    }
    let twist = TwistData::new(base_group, varpi, wp, c, tau)?;
    let v = validate_twist(&twist);
    if let Some(f) = v.failure {
        return Err(TwistError::InvalidInput(f));
    }
    let rep0 = PuaRep::new(twist, rep.images[..n].to_vec())?;
    Ok((rep0, metric))
}

// ---------------------------------------------------------------------------
// Clifford actions
// ---------------------------------------------------------------------------

/// Anticommuting unitary generators with prescribed squares (+1 for the
/// first `r`, −1 for the last `s`), all odd for a gradation.
#[derive(Debug, Clone)]
pub struct CliffordAction {
    r: usize,
    s: usize,
    generators: Vec<ComplexMatrix>,
    grading: Gradation,
}

impl CliffordAction {
    pub fn new(
        r: usize,
        s: usize,
        generators: Vec<ComplexMatrix>,
        grading: Gradation,
        tol: f64,
    ) -> Result<CliffordAction, TwistError> {
        if generators.len() != r + s {
            return Err(TwistError::BadShape(format!(
                "{} generators for signature ({r},{s})",
                generators.len()
            )));
        }
        let d = grading.dim();
        if generators.iter().any(|g| g.dim() != d) {
            return Err(TwistError::BadShape("generator dimensions do not match grading".into()));
        }
        let eye = ComplexMatrix::identity(d);
        let check = |relation: String, residual: f64| -> Result<(), TwistError> {
            if residual > tol {
                Err(TwistError::BadAction { relation, residual })
            } else {
                Ok(())
            }
        };
        for (i, g) in generators.iter().enumerate() {
            check(format!("unitarity of generator {i}"), (&(&g.adjoint() * g) - &eye).norm_fro())?;
            let sq = g * g;
            let want = if i < r { 1.0 } else { -1.0 };
            check(
                format!("square of generator {i}"),
                (&sq - &eye.scaled(c64::new(want, 0.0))).norm_fro(),
            )?;
            check(
                format!("oddness of generator {i}"),
                (&(g * grading.gamma()) + &(grading.gamma() * g)).norm_fro(),
            )?;
            for (j, h) in generators.iter().enumerate().skip(i + 1) {
                check(
                    format!("anticommutation of generators {i},{j}"),
                    (&(g * h) + &(h * g)).norm_fro(),
                )?;
            }
        }
        Ok(CliffordAction { r, s, generators, grading })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn grading(&self) -> &Gradation {
        &self.grading
    }

    pub fn dim(&self) -> usize {
        self.grading.dim()
    }
}

fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim(), b.dim());
    ComplexMatrix::from_fn(na * nb, |i, j| a[(i / nb, j / nb)] * b[(i % nb, j % nb)])
}

fn pauli(which: u8) -> ComplexMatrix {
    let (o, l) = (c64::new(0.0, 0.0), c64::new(1.0, 0.0));
    let i = c64::new(0.0, 1.0);
    match which {
        0 => ComplexMatrix::identity(2),
        1 => ComplexMatrix::from_rows(2, &[o, l, l, o]),
        2 => ComplexMatrix::from_rows(2, &[o, -i, i, o]),
        _ => ComplexMatrix::from_rows(2, &[l, o, o, -l]),
    }
}

/// A standard module for the (r,s) Clifford relations on ⌈(r+s)/2⌉ qubit
/// factors: alternating X/Y chains with Z prefixes, the all-Z string as
/// grading, and a factor of i on the s negative-square generators. All
/// relations hold exactly in floating point.
pub fn clifford_generators(r: usize, s: usize) -> CliffordAction {
    let n = r + s;
    let qubits = n.div_ceil(2);
    let build = |letters: &[u8]| -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(1);
        for &w in letters {
            m = kron(&m, &pauli(w));
        }
        m
    };
    let mut generators = Vec::with_capacity(n);
    for k in 0..n {
        let pos = k / 2;
        let mut letters = vec![3u8; pos];
        letters.push(if k % 2 == 0 { 1 } else { 2 });
        letters.resize(qubits, 0);
        let mut g = build(&letters);
        if k >= r {
            g = g.scaled(c64::i());
        }
        generators.push(g);
    }
    let grading = Gradation::new(build(&vec![3u8; qubits]), None, 1e-12)
        .expect("all-Z string is an exact involution");
    CliffordAction::new(r, s, generators, grading, 1e-12)
        .expect("chain construction satisfies the relations exactly")
}

fn vec_to_matrix(v: &[c64], d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, |i, j| v[i * d + j])
}

/// Near-null eigenvectors of the stacked (anti)commutation constraints,
/// returned as matrices. `signs[k]` = +1 demands commutation with ops[k],
/// −1 anticommutation.
fn constraint_null_space(
    ops: &[&ComplexMatrix],
    signs: &[i8],
    d: usize,
) -> Result<Vec<ComplexMatrix>, NumError> {
    let dd = d * d;
    let mut gram = ComplexMatrix::zeros(dd);
    for (a, sgn) in ops.iter().zip(signs) {
        // constraint L(X) = A X - sgn X A; as a dd x dd matrix on row-major vec(X)
        let l = ComplexMatrix::from_fn(dd, |row, col| {
            let (i, j) = (row / d, row % d);
            let (k, m) = (col / d, col % d);
            let mut v = c64::new(0.0, 0.0);
            if j == m {
                v += a[(i, k)];
            }
            if i == k {
                v -= a[(m, j)].scaled_sign(*sgn);
            }
            v
        });
        gram = &gram + &(&l.adjoint() * &l);
    }
    let eig = herm_eig(&gram, 1e-12)?;
    let span = eig.values.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let mut basis = Vec::new();
    for (idx, lam) in eig.values.iter().enumerate() {
        if lam.abs() <= 1e-8 * span {
            let col: Vec<c64> = (0..dd).map(|row| eig.vectors[(row, idx)]).collect();
            basis.push(vec_to_matrix(&col, d));
        }
    }
    Ok(basis)
}

trait SignScale {
    fn scaled_sign(&self, s: i8) -> c64;
}

impl SignScale for c64 {
    fn scaled_sign(&self, s: i8) -> c64 {
        if s >= 0 { *self } else { -*self }
    }
}

/// Dimension of the space of operators commuting with every generator and
/// with the grading; 1 certifies graded irreducibility.
pub fn graded_commutant_dim(action: &CliffordAction) -> Result<usize, TwistError> {
    let mut ops: Vec<&ComplexMatrix> = action.generators().iter().collect();
    ops.push(action.grading().gamma());
    let signs = vec![1i8; ops.len()];
    Ok(constraint_null_space(&ops, &signs, action.dim())?.len())
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Whether the module extends by one more odd generator squaring to −1.
/// Searches the null space of the anticommutation constraints for an
/// element with scalar square, and cross-checks the canonical products
/// i^k γ₁…γ_n Γ^m; any verified witness decides extendability.
pub fn graded_extension_test(action: &CliffordAction) -> Result<bool, TwistError> {
    let d = action.dim();
    let gamma = action.grading().gamma();
    let mut ops: Vec<&ComplexMatrix> = action.generators().iter().collect();
    ops.push(gamma);
    let signs = vec![-1i8; ops.len()];

    let certify = |x: &ComplexMatrix| -> bool {
        let norm = x.norm_fro();
        if norm <= 1e-10 {
            return false;
        }
        let worst = ops
            .iter()
            .map(|a| (&(*a * x) + &(x * *a)).norm_fro())
            .fold(0.0, f64::max);
        if worst > 1e-7 * norm {
            return false;
        }
        let sq = x * x;
        let lam = sq.trace() / c64::new(d as f64, 0.0);
        let scalar_res = (&sq - &ComplexMatrix::identity(d).scaled(lam)).norm_fro();
        if scalar_res > 1e-7 * norm * norm || lam.norm() <= 1e-8 * norm * norm {
            return false;
        }
        // normalize to square exactly -1 and re-verify
        let alpha = c64::i() / lam.sqrt();
        let xn = x.scaled(alpha);
        (&(&xn * &xn) + &ComplexMatrix::identity(d)).norm_fro() < 1e-6
    };

    let basis = constraint_null_space(&ops, &signs, d)?;
    for b in &basis {
        if certify(b) {
            return Ok(true);
        }
    }
    if basis.len() > 1 {
        let mut state = 0x6b7a_1d35_9f24_c081u64;
        for _ in 0..8 {
            let mut combo = ComplexMatrix::zeros(d);
            for b in &basis {
                let z = c64::new(
                    unit_from_bits(splitmix(&mut state)),
                    unit_from_bits(splitmix(&mut state)),
                );
                combo = &combo + &b.scaled(z);
            }
            if certify(&combo) {
                return Ok(true);
            }
        }
    }
    // canonical candidates: phase times the full generator product, with or
    // without a trailing grading factor
    let mut omega = ComplexMatrix::identity(d);
    for g in action.generators() {
        omega = &omega * g;
    }
    for with_gamma in [false, true] {
        let cand = if with_gamma { &omega * gamma } else { omega.clone() };
        if certify(&cand) {
            return Ok(true);
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------------------
// K-groups at a point
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupChoice {
    Trivial,
    Z2,
}

/// A sign character on the scenario group: constant +1, or the identity
/// character on ℤ₂ (which collapses to trivial on the trivial group).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignMap {
    Trivial,
    Id,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointScenario {
    pub group: GroupChoice,
    pub varpi: SignMap,
    pub wp: SignMap,
    pub c: SignMap,
    pub r: usize,
    pub s: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KGroupDescriptor {
    Z,
    Zero,
    ZPlusZ,
}

impl fmt::Display for KGroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KGroupDescriptor::Z => write!(f, "Z"),
            KGroupDescriptor::Zero => write!(f, "0"),
            KGroupDescriptor::ZPlusZ => write!(f, "Z+Z"),
        }
    }
}

/// Trace of a point computation: how many metric sectors contributed, the
/// qubit count of the minimal graded module, and whether the odd extension
/// exists (extendable modules contribute nothing to the group).
#[derive(Debug, Clone, Copy)]
pub struct PointComputation {
    pub descriptor: KGroupDescriptor,
    pub sectors: usize,
    pub qubits: usize,
    pub module_dim: usize,
    pub extendable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PauliWord {
    x: u64,
    z: u64,
}

impl PauliWord {
    const ID: PauliWord = PauliWord { x: 0, z: 0 };

    fn anticommutes(self, other: PauliWord) -> bool {
        let f = (self.x & other.z).count_ones() + (self.z & other.x).count_ones();
        f % 2 == 1
    }

    fn matrix(self, qubits: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::identity(1);
        for t in 0..qubits {
            let which = match ((self.x >> t) & 1, (self.z >> t) & 1) {
                (0, 0) => 0u8,
                (1, 0) => 1,
                (1, 1) => 2,
                _ => 3,
            };
            m = kron(&m, &pauli(which));
        }
        m
    }
}

/// Realizes an abstract anticommutation pattern by Pauli words: hyperbolic
/// pairs take fresh qubits, every other word picks up correction bits so
/// that the residual form vanishes. Returns one word per input row plus
/// the number of qubits used.
fn symplectic_assign(mut b: Vec<Vec<bool>>) -> (Vec<PauliWord>, usize) {
    let m = b.len();
    let mut words = vec![PauliWord::ID; m];
    let mut qubits = 0usize;
    loop {
        let mut pair = None;
        'outer: for i in 0..m {
            for j in i + 1..m {
                if b[i][j] {
                    pair = Some((i, j));
                    break 'outer;
                }
            }
        }
        let Some((i, j)) = pair else { break };
        let t = qubits;
        qubits += 1;
        assert!(t < 64, "qubit budget exceeded");
        let alpha: Vec<bool> = (0..m).map(|k| b[k][i]).collect();
        let beta: Vec<bool> = (0..m).map(|k| b[k][j]).collect();
        words[i].x |= 1 << t;
        words[j].z |= 1 << t;
        for k in 0..m {
            if k == i || k == j {
                continue;
            }
            if alpha[k] {
                words[k].z |= 1 << t;
            }
            if beta[k] {
                words[k].x |= 1 << t;
            }
        }
        for k in 0..m {
            for l in 0..m {
                if k == i || k == j || l == i || l == j || k == l {
                    continue;
                }
                b[k][l] ^= (alpha[k] && beta[l]) ^ (beta[k] && alpha[l]);
            }
        }
        for k in 0..m {
            b[i][k] = false;
            b[k][i] = false;
            b[j][k] = false;
            b[k][j] = false;
        }
    }
    (words, qubits)
}

fn sign_vec(map: SignMap, order: usize) -> Vec<i8> {
    match map {
        SignMap::Trivial => vec![1; order],
        SignMap::Id => (0..order).map(|g| if g == 0 { 1 } else { -1 }).collect(),
    }
}

/// Computes the K-group of a point scenario by running the whole pipeline:
/// metric reduction, absorption of all r+s Clifford generators into the
/// group, a minimal graded module over the resulting sign cocycle, and the
/// search for an odd Pauli word implementing one more negative-square
/// generator. No table lookup is involved; the descriptor falls out of the
/// GF(2) solvability of the extension constraints, doubled once when the
/// metric sector splits.
pub fn kgroup_point(sc: &PointScenario) -> Result<PointComputation, TwistError> {
    let z2 = matches!(sc.group, GroupChoice::Z2);
    if matches!(sc.varpi, SignMap::Id) && z2 {
        return Err(TwistError::UnsupportedScenario(
            "anti-linear scenarios (nontrivial varpi) are not computed".into(),
        ));
    }
    let group = if z2 { FiniteGroupData::cyclic2() } else { FiniteGroupData::trivial() };
    let order = group.order();
    let mut twist = TwistData::untwisted(group);
    twist.set_wp(sign_vec(sc.wp, order));
    twist.set_c(sign_vec(sc.c, order));

    // generator indices survive each extension because the layout keeps the
    // original block first
    let mut gens: Vec<usize> = if z2 { vec![1] } else { vec![] };
    let mut t = reduce_data(&twist)?;
    let eta_gen = order;
    gens.push(eta_gen);
    let mut sig = (sc.r, sc.s);
    while sig.0 + sig.1 > 0 {
        let before = t.group().order();
        let (next, rest) = clifford_absorb(&t, sig)?;
        t = next;
        sig = rest;
        gens.push(before);
    }

    let m = gens.len();
    let sign_of = |p: Phase| -> i8 {
        p.as_sign().expect("pipeline cocycles take values in ±1")
    };
    let squares: Vec<i8> = gens.iter().map(|&g| sign_of(t.tau(g, g))).collect();
    let gradings: Vec<i8> = gens.iter().map(|&g| t.c(g)).collect();
    // row/column 0 is the grading itself; entries record required
    // anticommutation
    let mut b = vec![vec![false; m + 1]; m + 1];
    for (k, &g) in gens.iter().enumerate() {
        b[0][k + 1] = gradings[k] < 0;
        b[k + 1][0] = gradings[k] < 0;
        for (l, &h) in gens.iter().enumerate().skip(k + 1) {
            let anti = sign_of(t.tau(g, h).mul(t.tau(h, g).conj())) < 0;
            b[k + 1][l + 1] = anti;
            b[l + 1][k + 1] = anti;
        }
    }
    let (words, qubits) = symplectic_assign(b);

    // concrete module, with phases fixing the squares; relations are exact
    let dim = 1usize << qubits;
    let gamma = words[0].matrix(qubits);
    let images: Vec<ComplexMatrix> = (0..m)
        .map(|k| {
            let w = words[k + 1].matrix(qubits);
            if squares[k] < 0 { w.scaled(c64::i()) } else { w }
        })
        .collect();
    for (k, img) in images.iter().enumerate() {
        let sq = img * img;
        let want = ComplexMatrix::identity(dim).scaled(c64::new(squares[k] as f64, 0.0));
        assert!((&sq - &want).norm_fro() < 1e-12, "square of generator {k} drifted");
        let lhs = &gamma * img;
        let rhs = (img * &gamma).scaled(c64::new(gradings[k] as f64, 0.0));
        assert!((&lhs - &rhs).norm_fro() < 1e-12, "grading sign of generator {k} drifted");
    }

    // odd extension word: anticommute with the grading, intertwine each
    // generator with its grading sign
    let mut extendable = false;
    'cand: for code in 0..(1u64 << (2 * qubits)) {
        let cand = PauliWord { x: code & ((1 << qubits) - 1), z: code >> qubits };
        if !cand.anticommutes(words[0]) {
            continue;
        }
        for (k, w) in words.iter().enumerate().skip(1) {
            if cand.anticommutes(*w) != (gradings[k - 1] < 0) {
                continue 'cand;
            }
        }
        extendable = true;
        break;
    }

    let eta_word = words[1 + gens.iter().position(|&g| g == eta_gen).unwrap()];
    let sectors = if eta_word == PauliWord::ID { 2 } else { 1 };
    let per_sector = if extendable { KGroupDescriptor::Zero } else { KGroupDescriptor::Z };
    let descriptor = match (per_sector, sectors) {
        (KGroupDescriptor::Zero, _) => KGroupDescriptor::Zero,
        (d, 1) => d,
        (_, _) => KGroupDescriptor::ZPlusZ,
    };
    Ok(PointComputation { descriptor, sectors, qubits, module_dim: dim, extendable })
}
