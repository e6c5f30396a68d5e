//! Small-matrix linear algebra for three-level Hamiltonians.
//!
//! Everything here works on fixed 3×3 complex arrays. The eigensolver is
//! closed form (trigonometric roots of the characteristic cubic) followed by
//! one inverse-iteration pass per eigenvector, so identical inputs always give
//! bit-identical outputs, which the nested finite differences downstream rely on.

use std::f64::consts::PI;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Relative tolerance on `h[i][j] - conj(h[j][i])`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues closer than this (relative to the Frobenius norm) are flagged degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Coefficient vector of the four Gell-Mann directions spanning the chiral
/// Hamiltonians: `(λ1, λ2, λ6, λ7*)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QVector {
    pub qx: f64,
    pub qy: f64,
    pub qz: f64,
    pub qw: f64,
}

impl QVector {
    pub const fn new(qx: f64, qy: f64, qz: f64, qw: f64) -> Self {
        Self { qx, qy, qz, qw }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.qx, self.qy, self.qz, self.qw]
    }

    pub fn norm(self) -> f64 {
        self.to_array().iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// A 3×3 Hermitian operator stored densely, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hermitian3 {
    entries: [[C64; 3]; 3],
}

impl Hermitian3 {
    pub fn zeros() -> Self {
        Self {
            entries: [[ZERO; 3]; 3],
        }
    }

    pub fn identity() -> Self {
        Self::diagonal([1.0, 1.0, 1.0])
    }

    pub fn diagonal(d: [f64; 3]) -> Self {
        let mut h = Self::zeros();
        for (i, &x) in d.iter().enumerate() {
            h.entries[i][i] = C64::new(x, 0.0);
        }
        h
    }

    /// Wraps raw entries without checking symmetry. Use [`Hermitian3::try_new`]
    /// for untrusted input.
    pub fn from_entries(entries: [[C64; 3]; 3]) -> Self {
        Self { entries }
    }

    /// Validates Hermiticity to [`HERMITIAN_TOL`] relative to the largest entry.
    pub fn try_new(entries: [[C64; 3]; 3]) -> Result<Self> {
        let h = Self { entries };
        h.check_hermitian()?;
        Ok(h)
    }

    /// Builds a matrix from its upper triangle; the diagonal is taken as real.
    pub fn from_upper(diag: [f64; 3], h01: C64, h02: C64, h12: C64) -> Self {
        let mut h = Self::diagonal(diag);
        h.set_offdiag(0, 1, h01);
        h.set_offdiag(0, 2, h02);
        h.set_offdiag(1, 2, h12);
        h
    }

    /// Sets `(i, j)` to `z` and `(j, i)` to `conj(z)`.
    pub fn set_offdiag(&mut self, i: usize, j: usize, z: C64) {
        self.entries[i][j] = z;
        self.entries[j][i] = z.conj();
    }

    pub fn entries(&self) -> &[[C64; 3]; 3] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..3).map(|i| self.entries[i][i].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Removes `trace/3` from the diagonal.
    pub fn traceless(&self) -> Self {
        let shift = self.trace() / 3.0;
        let mut h = *self;
        for i in 0..3 {
            h.entries[i][i] -= shift;
        }
        h
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut h = *self;
        for z in h.entries.iter_mut().flatten() {
            *z *= c;
        }
        h
    }

    pub fn apply(&self, v: &[C64; 3]) -> [C64; 3] {
        let mut out = [ZERO; 3];
        for (i, row) in self.entries.iter().enumerate() {
            out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        out
    }

    pub fn check_hermitian(&self) -> Result<()> {
        if self.entries.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("Hermitian3 entries"));
        }
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in i..3 {
                let d = (self.entries[i][j] - self.entries[j][i].conj()).norm();
                worst = worst.max(d);
            }
        }
        if worst > HERMITIAN_TOL * scale {
            return Err(Error::NonHermitianInput {
                violation: worst / scale,
            });
        }
        Ok(())
    }

    fn det(&self) -> C64 {
        let m = &self.entries;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    fn shifted(&self, sigma: f64) -> [[C64; 3]; 3] {
        let mut m = self.entries;
        for (i, row) in m.iter_mut().enumerate() {
            row[i] -= sigma;
        }
        m
    }
}

impl Index<(usize, usize)> for Hermitian3 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.entries[i][j]
    }
}

impl IndexMut<(usize, usize)> for Hermitian3 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.entries[i][j]
    }
}

impl Add for Hermitian3 {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.entries.iter_mut().flatten().zip(rhs.entries.iter().flatten()) {
            *a += b;
        }
        self
    }
}

impl Sub for Hermitian3 {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.entries.iter_mut().flatten().zip(rhs.entries.iter().flatten()) {
            *a -= b;
        }
        self
    }
}

impl Mul<f64> for Hermitian3 {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scaled(rhs)
    }
}

/// Ascending eigenvalues with column-aligned orthonormal eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem3 {
    pub values: [f64; 3],
    pub vectors: [[C64; 3]; 3],
    /// Set when two eigenvalues coincide within [`DEGENERACY_TOL`]·‖H‖; the
    /// vectors then span the degenerate eigenspace but are otherwise arbitrary.
    pub degenerate: bool,
}

impl EigenSystem3 {
    pub fn lowest(&self) -> (f64, [C64; 3]) {
        (self.values[0], self.vectors[0])
    }

    /// `(E0 - E-, E+ - E0)`.
    pub fn gaps(&self) -> (f64, f64) {
        (self.values[1] - self.values[0], self.values[2] - self.values[1])
    }

    pub fn min_gap(&self) -> f64 {
        let (a, b) = self.gaps();
        a.min(b)
    }

    pub fn spread(&self) -> f64 {
        self.values[2] - self.values[0]
    }
}

/// Composes `q·λ` with `λ = (λ1, λ2, λ6, λ7*)`.
pub fn gellmann_compose(q: QVector) -> Hermitian3 {
    Hermitian3::from_upper(
        [0.0; 3],
        C64::new(q.qx, -q.qy),
        ZERO,
        C64::new(q.qz, q.qw),
    )
}

/// Reads `q` back from a matrix with the chiral (zero-diagonal, nearest-neighbour) form.
pub fn gellmann_decompose(h: &Hermitian3) -> QVector {
    let h01 = h[(0, 1)];
    let h12 = h[(1, 2)];
    QVector::new(h01.re, -h01.im, h12.re, h12.im)
}

pub fn inner(a: &[C64; 3], b: &[C64; 3]) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1] + a[2].conj() * b[2]
}

pub fn vnorm(a: &[C64; 3]) -> f64 {
    inner(a, a).re.sqrt()
}

fn normalize(a: [C64; 3]) -> [C64; 3] {
    let n = vnorm(&a);
    [a[0] / n, a[1] / n, a[2] / n]
}

fn cross(a: &[C64; 3], b: &[C64; 3]) -> [C64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Null vector of a (numerically) rank-2 matrix: the largest cross product of two rows.
fn null_vector(m: &[[C64; 3]; 3]) -> Option<[C64; 3]> {
    let candidates = [cross(&m[0], &m[1]), cross(&m[0], &m[2]), cross(&m[1], &m[2])];
    let mut best = 0;
    let mut best_norm = vnorm(&candidates[0]);
    for (k, c) in candidates.iter().enumerate().skip(1) {
        let n = vnorm(c);
        if n > best_norm {
            best = k;
            best_norm = n;
        }
    }
    (best_norm > 0.0 && best_norm.is_finite()).then(|| normalize(candidates[best]))
}

/// One inverse-iteration step `w ∝ (H - σ)^{-1} v`, computed through the adjugate.
fn inverse_iteration(h: &Hermitian3, sigma: f64, v: &[C64; 3]) -> [C64; 3] {
    let m = h.shifted(sigma);
    // adj(M)·v, i.e. det(M)·M^{-1}·v without the division
    let adj = [
        [
            m[1][1] * m[2][2] - m[1][2] * m[2][1],
            m[0][2] * m[2][1] - m[0][1] * m[2][2],
            m[0][1] * m[1][2] - m[0][2] * m[1][1],
        ],
        [
            m[1][2] * m[2][0] - m[1][0] * m[2][2],
            m[0][0] * m[2][2] - m[0][2] * m[2][0],
            m[0][2] * m[1][0] - m[0][0] * m[1][2],
        ],
        [
            m[1][0] * m[2][1] - m[1][1] * m[2][0],
            m[0][1] * m[2][0] - m[0][0] * m[2][1],
            m[0][0] * m[1][1] - m[0][1] * m[1][0],
        ],
    ];
    let mut w = [ZERO; 3];
    for i in 0..3 {
        w[i] = adj[i][0] * v[0] + adj[i][1] * v[1] + adj[i][2] * v[2];
    }
    let n = vnorm(&w);
    if n > 0.0 && n.is_finite() {
        [w[0] / n, w[1] / n, w[2] / n]
    } else {
        *v
    }
}

/// Rotates `v` so its largest-magnitude component is real and positive.
pub fn fix_phase(v: [C64; 3]) -> [C64; 3] {
    let mut k = 0;
    for i in 1..3 {
        if v[i].norm() > v[k].norm() {
            k = i;
        }
    }
    let a = v[k].norm();
    if a == 0.0 {
        return v;
    }
    let phase = v[k].conj() / a;
    [v[0] * phase, v[1] * phase, v[2] * phase]
}

fn gram_schmidt(v: [C64; 3], against: &[[C64; 3]]) -> Option<[C64; 3]> {
    let mut w = v;
    for u in against {
        let c = inner(u, &w);
        for i in 0..3 {
            w[i] -= c * u[i];
        }
    }
    let n = vnorm(&w);
    (n > 1e-8).then(|| [w[0] / n, w[1] / n, w[2] / n])
}

/// Completes a set of orthonormal vectors to a basis using canonical unit vectors.
fn complete_basis(known: &[[C64; 3]]) -> Vec<[C64; 3]> {
    let mut basis: Vec<[C64; 3]> = known.to_vec();
    for e in 0..3 {
        if basis.len() == 3 {
            break;
        }
        let mut u = [ZERO; 3];
        u[e] = ONE;
        if let Some(w) = gram_schmidt(u, &basis) {
            basis.push(w);
        }
    }
    basis
}

/// Closed-form eigenvalues of a Hermitian 3×3 matrix, ascending.
fn cubic_roots(h: &Hermitian3) -> [f64; 3] {
    let m = h.trace() / 3.0;
    let b = h.shifted(m);
    let b = Hermitian3::from_entries(b);
    // p² = tr(B²)/6
    let p2 = b.frobenius_norm().powi(2) / 6.0;
    if p2 == 0.0 {
        return [m; 3];
    }
    let p = p2.sqrt();
    let r = (b.det().re / (2.0 * p2 * p)).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e_hi = m + 2.0 * p * phi.cos();
    let e_lo = m + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let e_mid = 3.0 * m - e_hi - e_lo;
    let mut v = [e_lo, e_mid, e_hi];
    v.sort_by(f64::total_cmp);
    v
}

fn rayleigh(h: &Hermitian3, v: &[C64; 3]) -> f64 {
    inner(v, &h.apply(v)).re
}

/// Eigen-decomposition of a Hermitian 3×3 matrix.
///
/// Eigenvalues come back ascending; each eigenvector has its largest component
/// real positive. Degenerate spectra are flagged rather than rejected.
pub fn eigh3(h: &Hermitian3) -> Result<EigenSystem3> {
    h.check_hermitian()?;
    let norm = h.frobenius_norm();
    let roots = cubic_roots(h);
    if norm == 0.0 {
        return Ok(EigenSystem3 {
            values: [0.0; 3],
            vectors: [[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, ONE]],
            degenerate: true,
        });
    }
    let tol = DEGENERACY_TOL * norm;
    let close01 = roots[1] - roots[0] <= tol;
    let close12 = roots[2] - roots[1] <= tol;

    let mut vectors = [[ZERO; 3]; 3];
    let mut values = roots;
    let degenerate = close01 || close12;

    if close01 && close12 {
        let shift = h.trace() / 3.0;
        return Ok(EigenSystem3 {
            values: [shift; 3],
            vectors: [[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, ONE]],
            degenerate: true,
        });
    }

    // Solve for the isolated eigenvectors first, then fill degenerate pairs
    // with an orthonormal complement.
    let isolated: Vec<usize> = match (close01, close12) {
        (false, false) => vec![0, 1, 2],
        (true, false) => vec![2],
        (false, true) => vec![0],
        (true, true) => unreachable!(),
    };
    let mut solved: Vec<[C64; 3]> = Vec::with_capacity(3);
    for &k in &isolated {
        let lam = roots[k];
        let v = match null_vector(&h.shifted(lam)) {
            Some(v) => v,
            None => complete_basis(&solved)[solved.len()],
        };
        // Shift just off the eigenvalue; the error component shrinks by ~offset/gap.
        let offset = 1e-10 * norm.max(lam.abs());
        let mut v = inverse_iteration(h, lam + offset, &v);
        if let Some(w) = gram_schmidt(v, &solved) {
            v = w;
        }
        solved.push(v);
        vectors[k] = v;
        values[k] = rayleigh(h, &v);
    }
    if degenerate {
        let basis = complete_basis(&solved);
        let pair: [usize; 2] = if close01 { [0, 1] } else { [1, 2] };
        for (slot, v) in pair.iter().zip(basis.iter().skip(solved.len())) {
            vectors[*slot] = *v;
            values[*slot] = rayleigh(h, v);
        }
    }
    for v in vectors.iter_mut() {
        *v = fix_phase(*v);
    }
    // Rayleigh refinement can reorder values that were nearly tied.
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let values = order.map(|k| values[k]);
    let vectors = order.map(|k| vectors[k]);
    Ok(EigenSystem3 {
        values,
        vectors,
        degenerate,
    })
}

/// The four basis matrices `λ1, λ2, λ6, λ7*` as `gellmann_compose` of unit vectors.
pub fn gellmann_basis() -> [Hermitian3; 4] {
    [
        gellmann_compose(QVector::new(1.0, 0.0, 0.0, 0.0)),
        gellmann_compose(QVector::new(0.0, 1.0, 0.0, 0.0)),
        gellmann_compose(QVector::new(0.0, 0.0, 1.0, 0.0)),
        gellmann_compose(QVector::new(0.0, 0.0, 0.0, 1.0)),
    ]
}

/// `tr(a·b)` for two Hermitian matrices.
pub fn trace_product(a: &Hermitian3, b: &Hermitian3) -> C64 {
    let mut t = ZERO;
    for i in 0..3 {
        for k in 0..3 {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}
