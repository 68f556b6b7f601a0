//! Dense complex linear algebra kernels: Hermitian eigensolver, complex Schur
//! form, Hermitian matrix functions and the Newton iteration for the matrix
//! sign. Everything is deterministic: identical inputs produce identical
//! output bytes, with no randomized pivoting or threading.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use thiserror::Error;

#[allow(non_camel_case_types)]
pub type c64 = num_complex::Complex64;

/// Default relative tolerance used across the crate when callers pass no
/// explicit value.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Iteration budget for the shifted QR stage of [`complex_schur`], measured in
/// total QR steps: `SCHUR_SWEEP_BUDGET * n` steps for an `n x n` input.
pub const SCHUR_SWEEP_BUDGET: usize = 40;

/// Jacobi sweep budget for [`herm_eig`].
pub const JACOBI_SWEEP_BUDGET: usize = 64;

#[derive(Debug, Error)]
pub enum NumError {
    #[error("matrix is not hermitian (residual {residual:.3e}, allowed {allowed:.3e})")]
    NotHermitian { residual: f64, allowed: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("{op}: {reason}")]
    DomainError { op: &'static str, reason: String },
    #[error("matrix is numerically singular")]
    Singular,
}

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<c64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        ComplexMatrix { n, data: vec![c64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = c64::new(1.0, 0.0);
        }
        m
    }

    /// Builds from a row-major slice of `n*n` entries.
    pub fn from_rows(n: usize, entries: &[c64]) -> Self {
        assert_eq!(entries.len(), n * n, "entry count does not match dimension");
        ComplexMatrix { n, data: entries.to_vec() }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> c64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diag(entries: &[c64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, z) in entries.iter().enumerate() {
            m[(i, i)] = *z;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        Self::diag(&entries.iter().map(|x| c64::new(*x, 0.0)).collect::<Vec<_>>())
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[c64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(i, j)].conj())
    }

    pub fn scaled(&self, z: c64) -> Self {
        ComplexMatrix { n: self.n, data: self.data.iter().map(|w| w * z).collect() }
    }

    pub fn apply(&self, v: &[c64]) -> Vec<c64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![c64::new(0.0, 0.0); self.n];
        for i in 0..self.n {
            let mut acc = c64::new(0.0, 0.0);
            for j in 0..self.n {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> c64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    /// `|| A - A* ||_F`, the distance from being Hermitian.
    pub fn herm_residual(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `|| A - 1 ||_F`.
    pub fn identity_residual(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let e = if i == j { c64::new(1.0, 0.0) } else { c64::new(0.0, 0.0) };
                acc += (self[(i, j)] - e).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn determinant(&self) -> Result<c64, NumError> {
        Ok(Lu::factor(self)?.det())
    }

    pub fn inverse(&self) -> Result<ComplexMatrix, NumError> {
        Lu::factor(self)?.inverse()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = c64;
    fn index(&self, (i, j): (usize, usize)) -> &c64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut c64 {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n, "dimension mismatch in matrix product");
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == c64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n);
        ComplexMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n, rhs.n);
        ComplexMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.n, self.n)?;
        for i in 0..self.n {
            write!(f, "  ")?;
            for j in 0..self.n {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

// ---------------------------------------------------------------------------
// LU with partial pivoting
// ---------------------------------------------------------------------------

struct Lu {
    n: usize,
    lum: Vec<c64>,
    perm: Vec<usize>,
    swaps: usize,
}

impl Lu {
    fn factor(m: &ComplexMatrix) -> Result<Lu, NumError> {
        let n = m.n;
        let mut a = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let scale = m.max_abs().max(1.0);
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].norm();
            for i in k + 1..n {
                let v = a[i * n + k].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= scale * 1e-300 {
                return Err(NumError::Singular);
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let piv = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / piv;
                a[i * n + k] = f;
                for j in k + 1..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= f * akj;
                }
            }
        }
        Ok(Lu { n, lum: a, perm, swaps })
    }

    fn det(&self) -> c64 {
        let mut d = if self.swaps % 2 == 0 { c64::new(1.0, 0.0) } else { c64::new(-1.0, 0.0) };
        for k in 0..self.n {
            d *= self.lum[k * self.n + k];
        }
        d
    }

    fn solve(&self, b: &[c64]) -> Vec<c64> {
        let n = self.n;
        let mut y = vec![c64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = b[self.perm[i]];
            for j in 0..i {
                acc -= self.lum[i * n + j] * y[j];
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..n {
                acc -= self.lum[i * n + j] * y[j];
            }
            y[i] = acc / self.lum[i * n + i];
        }
        y
    }

    fn inverse(&self) -> Result<ComplexMatrix, NumError> {
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n);
        let mut e = vec![c64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = c64::new(1.0, 0.0);
            let col = self.solve(&e);
            e[j] = c64::new(0.0, 0.0);
            for i in 0..n {
                out[(i, j)] = col[i];
            }
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver (cyclic Jacobi)
// ---------------------------------------------------------------------------

/// Eigendecomposition of a Hermitian matrix: `m = V diag(values) V*` with
/// `values` ascending and `V` unitary (columns are eigenvectors).
#[derive(Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic Jacobi with complex rotations. Deterministic; fails with
/// [`NumError::NotHermitian`] if the input is not Hermitian within
/// `tol * max(1, ||m||_F)`.
pub fn herm_eig(m: &ComplexMatrix, tol: f64) -> Result<HermEig, NumError> {
    let n = m.dim();
    let scale = m.norm_fro().max(1.0);
    let hres = m.herm_residual();
    if hres > tol * scale {
        return Err(NumError::NotHermitian { residual: hres, allowed: tol * scale });
    }
    let mut a = m.clone();
    // fold the (tiny) anti-Hermitian part away so the iteration sees an
    // exactly Hermitian matrix
    for i in 0..n {
        a[(i, i)] = c64::new(a[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let stop = tol.max(f64::EPSILON) * scale;
    let mut sweeps = 0;
    while off_diagonal_norm(&a) > stop {
        if sweeps >= JACOBI_SWEEP_BUDGET {
            return Err(NumError::NoConvergence {
                iterations: sweeps,
                residual: off_diagonal_norm(&a),
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J differs from identity in rows/cols p,q:
                //   J[p][p] = c, J[p][q] = s*phase, J[q][p] = -s*conj(phase), J[q][q] = c
                let spp = s * phase;
                // columns: A <- A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * spp.conj();
                    a[(k, q)] = akp * spp + akq * c;
                }
                // rows: A <- J* A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * spp;
                    a[(q, k)] = apk * spp.conj() + aqk * c;
                }
                a[(p, q)] = c64::new(0.0, 0.0);
                a[(q, p)] = c64::new(0.0, 0.0);
                a[(p, p)] = c64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = c64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * spp.conj();
                    v[(k, q)] = vkp * spp + vkq * c;
                }
            }
        }
        sweeps += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap().then(i.cmp(&j)));
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (newcol, &oldcol) in order.iter().enumerate() {
        // canonical phase: largest entry made real positive
        let mut best = 0usize;
        let mut bestval = 0.0;
        for i in 0..n {
            let w = v[(i, oldcol)].norm();
            if w > bestval + 1e-14 {
                bestval = w;
                best = i;
            }
        }
        let pivot = v[(best, oldcol)];
        let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { c64::new(1.0, 0.0) };
        for i in 0..n {
            vectors[(i, newcol)] = v[(i, oldcol)] * phase;
        }
    }
    Ok(HermEig { values, vectors })
}

impl HermEig {
    /// Rebuilds `V f(diag) V*` for a real function of the eigenvalues.
    pub fn assemble(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        self.assemble_complex(|x| c64::new(f(x), 0.0))
    }

    pub fn assemble_complex(&self, f: impl Fn(f64) -> c64) -> ComplexMatrix {
        let n = self.vectors.dim();
        let fv: Vec<c64> = self.values.iter().map(|&x| f(x)).collect();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = c64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.vectors[(i, k)] * fv[k] * self.vectors[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

/// Operator 2-norm computed from the Hermitian eigenvalues of `A* A`.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    let gram = &m.adjoint() * m;
    let eig = herm_eig(&gram, DEFAULT_TOL).expect("gram matrix is hermitian by construction");
    eig.values.last().map(|x| x.max(0.0).sqrt()).unwrap_or(0.0)
}

// ---------------------------------------------------------------------------
// Complex Schur form
// ---------------------------------------------------------------------------

/// Unitary Schur factorization `m = Q T Q*` with `T` upper triangular.
/// The diagonal of `T` (and hence `eigenvalues`) is sorted by real part,
/// then imaginary part.
#[derive(Debug)]
pub struct SchurForm {
    pub q: ComplexMatrix,
    pub t: ComplexMatrix,
    pub eigenvalues: Vec<c64>,
}

fn givens(x: c64, y: c64) -> (f64, c64) {
    let nx = x.norm();
    let ny = y.norm();
    if ny == 0.0 {
        return (1.0, c64::new(0.0, 0.0));
    }
    if nx == 0.0 {
        return (0.0, c64::new(1.0, 0.0));
    }
    let r = (nx * nx + ny * ny).sqrt();
    let c = nx / r;
    let s = (x / nx) * y.conj() / r;
    (c, s)
}

fn hessenberg(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.dim();
    let mut a = m.clone();
    let mut q = ComplexMatrix::identity(n);
    if n < 3 {
        return (q, a);
    }
    for k in 0..n - 2 {
        let mut norm2 = 0.0;
        for i in k + 1..n {
            norm2 += a[(i, k)].norm_sqr();
        }
        let norm = norm2.sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { c64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        let mut v = vec![c64::new(0.0, 0.0); n];
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vv == 0.0 {
            continue;
        }
        let beta = 2.0 / vv;
        // A <- P A, rows k+1..n
        for j in 0..n {
            let mut dot = c64::new(0.0, 0.0);
            for i in k + 1..n {
                dot += v[i].conj() * a[(i, j)];
            }
            dot *= beta;
            for i in k + 1..n {
                let vi = v[i];
                a[(i, j)] -= vi * dot;
            }
        }
        // A <- A P, cols k+1..n
        for i in 0..n {
            let mut dot = c64::new(0.0, 0.0);
            for j in k + 1..n {
                dot += a[(i, j)] * v[j];
            }
            dot *= beta;
            for j in k + 1..n {
                a[(i, j)] -= dot * v[j].conj();
            }
        }
        // Q <- Q P
        for i in 0..n {
            let mut dot = c64::new(0.0, 0.0);
            for j in k + 1..n {
                dot += q[(i, j)] * v[j];
            }
            dot *= beta;
            for j in k + 1..n {
                q[(i, j)] -= dot * v[j].conj();
            }
        }
        for i in k + 2..n {
            a[(i, k)] = c64::new(0.0, 0.0);
        }
        a[(k + 1, k)] = alpha;
    }
    (q, a)
}

fn wilkinson_shift(h: &ComplexMatrix, hi: usize) -> c64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let tr2 = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr2 * tr2 - det).sqrt();
    let l1 = tr2 + disc;
    let l2 = tr2 - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Hessenberg reduction followed by explicitly shifted QR with Wilkinson
/// shifts; an ad-hoc exceptional shift is injected after every ten stalled
/// steps on the same trailing eigenvalue. Gives up with
/// [`NumError::NoConvergence`] after `SCHUR_SWEEP_BUDGET * n` QR steps.
pub fn complex_schur(m: &ComplexMatrix, tol: f64) -> Result<SchurForm, NumError> {
    let n = m.dim();
    if n == 0 {
        return Ok(SchurForm {
            q: ComplexMatrix::identity(0),
            t: ComplexMatrix::identity(0),
            eigenvalues: vec![],
        });
    }
    let scale = m.norm_fro().max(1.0);
    let (mut q, mut h) = hessenberg(m);
    let defl = |h: &ComplexMatrix, i: usize| -> bool {
        let local = h[(i, i)].norm() + h[(i + 1, i + 1)].norm();
        let thresh = if local > 0.0 { tol * local } else { tol * scale };
        h[(i + 1, i)].norm() <= thresh
    };
    let budget = SCHUR_SWEEP_BUDGET * n.max(1);
    let mut iters = 0usize;
    let mut hi = n - 1;
    let mut stall = 0usize;
    while hi > 0 {
        // deflate converged subdiagonal entries at the bottom
        if defl(&h, hi - 1) {
            h[(hi, hi - 1)] = c64::new(0.0, 0.0);
            hi -= 1;
            stall = 0;
            continue;
        }
        // find the window start
        let mut lo = hi - 1;
        while lo > 0 && !defl(&h, lo - 1) {
            lo -= 1;
        }
        if lo > 0 {
            h[(lo, lo - 1)] = c64::new(0.0, 0.0);
        }
        if iters >= budget {
            let res = h[(hi, hi - 1)].norm();
            return Err(NumError::NoConvergence { iterations: iters, residual: res });
        }
        iters += 1;
        stall += 1;
        let mut mu = wilkinson_shift(&h, hi);
        if stall > 0 && stall % 10 == 0 {
            let extra = h[(hi, hi - 1)].norm()
                + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            mu = h[(hi, hi)] + c64::new(0.75 * extra, 0.125 * extra);
        }
        // explicit shifted QR step on [lo, hi]
        for i in lo..=hi {
            h[(i, i)] -= mu;
        }
        let mut rots: Vec<(f64, c64)> = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rots.push((c, s));
            for j in k..n {
                let top = h[(k, j)];
                let bot = h[(k + 1, j)];
                h[(k, j)] = top * c + bot * s;
                h[(k + 1, j)] = -top * s.conj() + bot * c;
            }
            h[(k + 1, k)] = c64::new(0.0, 0.0);
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let k = lo + idx;
            let top_rows = (k + 2).min(n);
            for i in 0..top_rows {
                let left = h[(i, k)];
                let right = h[(i, k + 1)];
                h[(i, k)] = left * c + right * s.conj();
                h[(i, k + 1)] = -left * s + right * c;
            }
            for i in 0..n {
                let left = q[(i, k)];
                let right = q[(i, k + 1)];
                q[(i, k)] = left * c + right * s.conj();
                q[(i, k + 1)] = -left * s + right * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += mu;
        }
    }
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = c64::new(0.0, 0.0);
        }
    }
    sort_triangular(&mut h, &mut q);
    let eigenvalues: Vec<c64> = (0..n).map(|i| h[(i, i)]).collect();
    Ok(SchurForm { q, t: h, eigenvalues })
}

/// Bubble-sorts the diagonal of a triangular factor by (re, im), swapping
/// adjacent eigenvalues with exact 2x2 unitary exchanges.
fn sort_triangular(t: &mut ComplexMatrix, q: &mut ComplexMatrix) {
    let n = t.dim();
    let before = |a: c64, b: c64| -> bool {
        (a.re, a.im) < (b.re, b.im)
    };
    let mut changed = true;
    while changed {
        changed = false;
        for k in 0..n.saturating_sub(1) {
            let l1 = t[(k, k)];
            let l2 = t[(k + 1, k + 1)];
            if !before(l2, l1) {
                continue;
            }
            changed = true;
            let tt = t[(k, k + 1)];
            let delta = l2 - l1;
            let rho = (tt.norm_sqr() + delta.norm_sqr()).sqrt();
            if rho == 0.0 {
                continue;
            }
            // unitary g with first column the (normalized) eigenvector of
            // [[l1, tt], [0, l2]] for l2
            let g00 = tt / rho;
            let g10 = delta / rho;
            let g01 = -delta.conj() / rho;
            let g11 = tt.conj() / rho;
            for i in 0..n {
                let a = t[(i, k)];
                let b = t[(i, k + 1)];
                t[(i, k)] = a * g00 + b * g10;
                t[(i, k + 1)] = a * g01 + b * g11;
            }
            for j in 0..n {
                let a = t[(k, j)];
                let b = t[(k + 1, j)];
                t[(k, j)] = g00.conj() * a + g10.conj() * b;
                t[(k + 1, j)] = g01.conj() * a + g11.conj() * b;
            }
            for i in 0..n {
                let a = q[(i, k)];
                let b = q[(i, k + 1)];
                q[(i, k)] = a * g00 + b * g10;
                q[(i, k + 1)] = a * g01 + b * g11;
            }
            t[(k + 1, k)] = c64::new(0.0, 0.0);
            t[(k, k)] = l2;
            t[(k + 1, k + 1)] = l1;
        }
    }
}

// ---------------------------------------------------------------------------
// Matrix functions
// ---------------------------------------------------------------------------

/// Scalar function lifted to a Hermitian matrix through its eigenbasis.
pub enum MatFun<'a> {
    Exp,
    Log,
    Sqrt,
    Abs,
    Sign,
    Custom(&'a dyn Fn(f64) -> f64),
}

/// `V f(diag) V*` for Hermitian input. `Log` and `Sqrt` require positive
/// definite input; `Sign` requires no eigenvalue within `tol * scale` of
/// zero. The returned matrix is Hermitian for every built-in `f`.
pub fn matfun_hermitian(m: &ComplexMatrix, f: MatFun, tol: f64) -> Result<ComplexMatrix, NumError> {
    let eig = herm_eig(m, tol)?;
    let span = eig
        .values
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max)
        .max(1.0);
    match f {
        MatFun::Log | MatFun::Sqrt => {
            let lo = eig.values.first().copied().unwrap_or(0.0);
            if lo <= tol * span {
                let op = if matches!(f, MatFun::Log) { "log" } else { "sqrt" };
                return Err(NumError::DomainError {
                    op,
                    reason: format!("matrix is not positive definite (min eigenvalue {lo:.3e})"),
                });
            }
        }
        MatFun::Sign => {
            let closest = eig.values.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
            if closest <= tol * span {
                return Err(NumError::DomainError {
                    op: "sign",
                    reason: format!("eigenvalue too close to zero ({closest:.3e})"),
                });
            }
        }
        _ => {}
    }
    let out = match f {
        MatFun::Exp => eig.assemble(f64::exp),
        MatFun::Log => eig.assemble(f64::ln),
        MatFun::Sqrt => eig.assemble(f64::sqrt),
        MatFun::Abs => eig.assemble(f64::abs),
        MatFun::Sign => eig.assemble(|x| if x >= 0.0 { 1.0 } else { -1.0 }),
        MatFun::Custom(g) => eig.assemble(g),
    };
    Ok(out)
}

// ---------------------------------------------------------------------------
// Matrix sign via Newton
// ---------------------------------------------------------------------------

/// Newton iteration `X <- (cX + (cX)^-1) / 2` with determinantal scaling
/// `c = |det X|^(-1/n)`. Converges quadratically when no eigenvalue lies on
/// the imaginary axis; divergence (residual growth over five consecutive
/// steps, a singular iterate, or an exhausted budget) reports
/// [`NumError::NoConvergence`], the typical sign that the spectrum touches
/// the imaginary axis.
pub fn matsign_newton(
    m: &ComplexMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<ComplexMatrix, NumError> {
    let n = m.dim();
    let mut x = m.clone();
    let mut grow = 0usize;
    let mut prev_res = f64::INFINITY;
    for it in 0..max_iter {
        let lu = match Lu::factor(&x) {
            Ok(lu) => lu,
            Err(_) => {
                return Err(NumError::NoConvergence { iterations: it, residual: prev_res })
            }
        };
        let det = lu.det().norm();
        let c = if det > 0.0 { det.powf(-1.0 / n as f64) } else { 1.0 };
        let inv = lu.inverse()?;
        // (cX + (cX)^-1)/2 = (cX + X^-1/c)/2
        let next = &x.scaled(c64::new(0.5 * c, 0.0)) + &inv.scaled(c64::new(0.5 / c, 0.0));
        let step = (&next - &x).norm_fro() / x.norm_fro().max(1.0);
        let res = (&(&next * &next) - &ComplexMatrix::identity(n)).norm_fro();
        if step <= tol && res <= 100.0 * tol * next.norm_fro().max(1.0) {
            return Ok(next);
        }
        if res > prev_res * (1.0 + 1e-12) {
            grow += 1;
            if grow >= 5 {
                return Err(NumError::NoConvergence { iterations: it, residual: res });
            }
        } else {
            grow = 0;
        }
        prev_res = res;
        x = next;
    }
    Err(NumError::NoConvergence { iterations: max_iter, residual: prev_res })
}

/// Sorts complex values by (re, im); used for spectra comparisons.
pub fn sorted_spectrum(values: &[c64]) -> Vec<c64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    v
}

/// True when the two multisets agree within `tol`, matching each value of
/// `a` greedily to the closest unused value of `b` (sorting alone is too
/// brittle when conjugate pairs differ by noise in the tie-breaking part).
pub fn spectra_match(a: &[c64], b: &[c64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let sa = sorted_spectrum(a);
    let mut pool = sorted_spectrum(b);
    for x in &sa {
        let best = match pool
            .iter()
            .enumerate()
            .min_by(|(_, p), (_, q)| (x - *p).norm().partial_cmp(&(x - *q).norm()).unwrap())
        {
            Some((k, _)) => k,
            None => return false,
        };
        if (x - pool[best]).norm() > tol {
            return false;
        }
        pool.swap_remove(best);
    }
    true
}
