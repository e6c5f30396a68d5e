//! Tensor Berry connection and curvature of the lowest band.
//!
//! The lowest eigenstate of a chiral Hamiltonian is gauge fixed to
//! `(v1, -1, v2)/√2`. From it come the fields `α1 = -i·log v2`,
//! `α2 = conj(v1)`, `α3 = v1`, the connection
//! `B_{μν} = (i/3)·ε_{jkl}·α_j·∂_μα_k·∂_να_l` and the curvature
//! `H_{μνλ} = ∂_μB_{νλ} + ∂_νB_{λμ} + ∂_λB_{μν}`. All derivatives are
//! central differences in the phase coordinates: an inner step for `∂α`
//! and an outer step for `∂B`.
//!
//! Evaluated literally, the cyclic sum is exactly twice `ε_{μνλγ}q_γ/|q|⁴`
//! on the canonical model, so [`CURVATURE_NORMALIZATION`] scales it to the
//! form whose flux through a closed surface around a monopole is `2π²`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::algebra::{eigh3, inner, EigenSystem3, Hermitian3, QVector, C64};
use crate::error::{Error, Result};
use crate::models::{wrap_phase, Axis, Model, PhasePoint};

/// Global factor applied to the cyclic derivative of the connection.
pub const CURVATURE_NORMALIZATION: f64 = 0.5;

/// Default inner and outer finite-difference steps, radians.
pub const DEFAULT_STEP: f64 = 1e-3;

/// Relative gap below which a stencil point counts as degenerate.
pub const DEFAULT_GAP_MIN: f64 = 1e-8;

/// Bound on the discarded imaginary part relative to the cyclic terms.
pub const DEFAULT_IMAG_REL: f64 = 1e-2;

/// `|v2|` below which [`tensor_connection`] switches to the swapped chart.
pub const SWAP_THRESHOLD: f64 = 1e-6;

const I: C64 = C64::new(0.0, 1.0);

/// Lowest eigenstate written as `(v1, -1, v2)/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeFixedState {
    pub v1: C64,
    pub v2: C64,
}

impl GaugeFixedState {
    pub fn vector(&self) -> [C64; 3] {
        [
            self.v1 * FRAC_1_SQRT_2,
            C64::new(-FRAC_1_SQRT_2, 0.0),
            self.v2 * FRAC_1_SQRT_2,
        ]
    }
}

/// Which component of the gauge-fixed state carries the logarithm.
///
/// `Standard` follows the usual assignment (`α1 = -i·log v2`, `α3 = v1`).
/// `Swapped` exchanges the two outer basis states, so `α1 = -i·log v1` and
/// `α3 = v2`. The exchange maps `q → (qz, qw, qx, qy)`, an even permutation,
/// so the curvature is unchanged while the connection shifts by an exact term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    Standard,
    Swapped,
}

/// How a curvature evaluation picks its chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ChartRule {
    /// Use whichever of `v1`, `v2` has the larger modulus at the stencil centre
    /// as the logarithm argument.
    #[default]
    Auto,
    Fixed(Chart),
}

/// The three fields entering the connection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaFields {
    pub alpha1: C64,
    pub alpha2: C64,
    pub alpha3: C64,
}

impl AlphaFields {
    fn as_array(&self) -> [C64; 3] {
        [self.alpha1, self.alpha2, self.alpha3]
    }
}

/// Builds the α-fields in the given chart. `branch` is the reference phase
/// `arg` is unwrapped against; `None` takes the principal branch.
pub fn alpha_fields(state: &GaugeFixedState, chart: Chart, branch: Option<f64>) -> AlphaFields {
    let (log_arg, field) = match chart {
        Chart::Standard => (state.v2, state.v1),
        Chart::Swapped => (state.v1, state.v2),
    };
    let raw = log_arg.arg();
    let phase = match branch {
        Some(r) => r + wrap_phase(raw - r),
        None => raw,
    };
    // -i·log(a) = arg(a) - i·ln|a|
    AlphaFields {
        alpha1: C64::new(phase, -log_arg.norm().ln()),
        alpha2: field.conj(),
        alpha3: field,
    }
}

/// Gauge-fixes the lowest eigenvector of a chiral Hamiltonian.
pub fn ground_state_gauge_fixed(h: &Hermitian3) -> Result<GaugeFixedState> {
    let es = eigh3(h)?;
    let threshold = DEFAULT_GAP_MIN * h.frobenius_norm();
    let gap = es.values[1] - es.values[0];
    if gap < threshold || gap <= 0.0 {
        return Err(Error::DegenerateGroundState { gap, threshold });
    }
    gauge_fix_vector(&es.vectors[0])
}

fn gauge_fix_vector(u: &[C64; 3]) -> Result<GaugeFixedState> {
    let middle = u[1].norm();
    if (middle - FRAC_1_SQRT_2).abs() > 1e-6 {
        return Err(Error::NotChiral { middle });
    }
    // rotate so the middle component is -|u1|, then read off v1, v2
    let phase = -u[1].conj() / middle;
    let mut v1 = u[0] * phase * SQRT_2;
    let mut v2 = u[2] * phase * SQRT_2;
    let n = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
    v1 /= n;
    v2 /= n;
    Ok(GaugeFixedState { v1, v2 })
}

/// Finite-difference steps, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Steps {
    pub outer: f64,
    pub inner: f64,
}

impl Default for Steps {
    fn default() -> Self {
        Self {
            outer: DEFAULT_STEP,
            inner: DEFAULT_STEP,
        }
    }
}

impl Steps {
    pub fn uniform(h: f64) -> Self {
        Self { outer: h, inner: h }
    }

    pub fn halved(self) -> Self {
        Self {
            outer: self.outer / 2.0,
            inner: self.inner / 2.0,
        }
    }
}

/// Phase function applied to the raw eigenvector before gauge fixing.
pub type Regauge = fn(&PhasePoint) -> f64;

/// Geometry of the lowest band of one model.
#[derive(Debug, Clone, Copy)]
pub struct Geometry<'m> {
    pub model: &'m Model,
    pub steps: Steps,
    /// Gap threshold relative to the model coupling scale.
    pub gap_min: f64,
    /// Curvature imaginary parts up to `imag_rel·|value| + imag_abs` are dropped.
    pub imag_rel: f64,
    pub imag_abs: f64,
    pub chart_rule: ChartRule,
    pub regauge: Option<Regauge>,
    /// Multiplies the cyclic sum; tests set 1.0 to recover the literal value.
    pub normalization: f64,
}

/// Independent components `(H_xyz, H_xyw, H_xzw, H_yzw)`.
pub const COMPONENTS: [[Axis; 3]; 4] = [
    [Axis::X, Axis::Y, Axis::Z],
    [Axis::X, Axis::Y, Axis::W],
    [Axis::X, Axis::Z, Axis::W],
    [Axis::Y, Axis::Z, Axis::W],
];

#[derive(Clone, Copy, PartialEq)]
struct Offset {
    outer: [i8; 4],
    inner: [i8; 4],
}

struct Stencil<'g, 'm> {
    geo: &'g Geometry<'m>,
    center: PhasePoint,
    chart: Chart,
    branch: f64,
    cache: Vec<(Offset, [C64; 3])>,
}

impl<'g, 'm> Stencil<'g, 'm> {
    fn new(geo: &'g Geometry<'m>, center: PhasePoint) -> Result<Self> {
        let state = geo.state(&center)?;
        let chart = match geo.chart_rule {
            ChartRule::Fixed(c) => c,
            ChartRule::Auto if state.v2.norm() >= state.v1.norm() => Chart::Standard,
            ChartRule::Auto => Chart::Swapped,
        };
        let fields = alpha_fields(&state, chart, None);
        let mut s = Self {
            geo,
            center,
            chart,
            branch: fields.alpha1.re,
            cache: Vec::with_capacity(64),
        };
        s.cache.push((
            Offset {
                outer: [0; 4],
                inner: [0; 4],
            },
            fields.as_array(),
        ));
        Ok(s)
    }

    fn alpha(&mut self, off: Offset) -> Result<[C64; 3]> {
        if let Some((_, a)) = self.cache.iter().find(|(o, _)| *o == off) {
            return Ok(*a);
        }
        let mut d = [0.0; 4];
        for k in 0..4 {
            d[k] = self.geo.steps.outer * off.outer[k] as f64 + self.geo.steps.inner * off.inner[k] as f64;
        }
        let state = self.geo.state(&self.center.offset(&d))?;
        let fields = alpha_fields(&state, self.chart, Some(self.branch));
        let jump = (fields.alpha1.re - self.branch).abs();
        if jump > PI / 2.0 {
            return Err(Error::BranchJump { jump });
        }
        let a = fields.as_array();
        self.cache.push((off, a));
        Ok(a)
    }

    /// `B_{νλ}` at the outer offset, without the `i/3` prefactor applied twice.
    fn connection(&mut self, outer: [i8; 4], nu: Axis, lam: Axis) -> Result<C64> {
        if nu == lam {
            return Ok(C64::new(0.0, 0.0));
        }
        let at = |inner: [i8; 4]| Offset { outer, inner };
        let unit = |a: Axis, s: i8| {
            let mut u = [0i8; 4];
            u[a.index()] = s;
            u
        };
        let (np, nm, lp, lm) = (unit(nu, 1), unit(nu, -1), unit(lam, 1), unit(lam, -1));
        let alpha = self.alpha(at([0; 4]))?;
        let h2 = 2.0 * self.geo.steps.inner;
        let d_nu = diff(&self.alpha(at(np))?, &self.alpha(at(nm))?, h2);
        let d_lam = diff(&self.alpha(at(lp))?, &self.alpha(at(lm))?, h2);
        Ok(connection_from_fields(&alpha, &d_nu, &d_lam))
    }

    fn d_outer(&mut self, mu: Axis, nu: Axis, lam: Axis) -> Result<C64> {
        let mut plus = [0i8; 4];
        plus[mu.index()] = 1;
        let minus = plus.map(|c| -c);
        let bp = self.connection(plus, nu, lam)?;
        let bm = self.connection(minus, nu, lam)?;
        Ok((bp - bm) / (2.0 * self.geo.steps.outer))
    }

    /// Normalized cyclic sum and the magnitude of its three terms.
    fn curvature(&mut self, mu: Axis, nu: Axis, lam: Axis) -> Result<(C64, f64)> {
        if mu == nu || nu == lam || mu == lam {
            return Ok((C64::new(0.0, 0.0), 0.0));
        }
        let terms = [
            self.d_outer(mu, nu, lam)?,
            self.d_outer(nu, lam, mu)?,
            self.d_outer(lam, mu, nu)?,
        ];
        let k = self.geo.normalization;
        let scale = terms.iter().map(|t| t.norm()).sum::<f64>() * k.abs();
        Ok((terms.iter().sum::<C64>() * k, scale))
    }
}

fn diff(a: &[C64; 3], b: &[C64; 3], h2: f64) -> [C64; 3] {
    [(a[0] - b[0]) / h2, (a[1] - b[1]) / h2, (a[2] - b[2]) / h2]
}

/// `(i/3)·α·(∂_μα × ∂_να)`, the ε-contraction written as a triple product.
pub fn connection_from_fields(alpha: &[C64; 3], d_mu: &[C64; 3], d_nu: &[C64; 3]) -> C64 {
    let cross = [
        d_mu[1] * d_nu[2] - d_mu[2] * d_nu[1],
        d_mu[2] * d_nu[0] - d_mu[0] * d_nu[2],
        d_mu[0] * d_nu[1] - d_mu[1] * d_nu[0],
    ];
    let triple = alpha[0] * cross[0] + alpha[1] * cross[1] + alpha[2] * cross[2];
    I * triple / 3.0
}

impl<'m> Geometry<'m> {
    pub fn new(model: &'m Model) -> Self {
        Self {
            model,
            steps: Steps::default(),
            gap_min: DEFAULT_GAP_MIN,
            imag_rel: DEFAULT_IMAG_REL,
            imag_abs: 1e-9,
            chart_rule: ChartRule::Auto,
            regauge: None,
            normalization: CURVATURE_NORMALIZATION,
        }
    }

    pub fn with_steps(mut self, steps: Steps) -> Self {
        self.steps = steps;
        self
    }

    pub fn with_regauge(mut self, g: Regauge) -> Self {
        self.regauge = Some(g);
        self
    }

    pub fn with_chart(mut self, chart: Chart) -> Self {
        self.chart_rule = ChartRule::Fixed(chart);
        self
    }

    pub fn gap_threshold(&self) -> f64 {
        self.gap_min * self.model.coupling_scale()
    }

    pub fn eigensystem(&self, pt: &PhasePoint) -> Result<EigenSystem3> {
        eigh3(&self.model.hamiltonian(pt))
    }

    /// Lowest eigenvector with the optional re-gauging applied, no gauge fixing.
    pub fn raw_ground_state(&self, pt: &PhasePoint) -> Result<[C64; 3]> {
        let es = self.eigensystem(pt)?;
        let gap = es.values[1] - es.values[0];
        let threshold = self.gap_threshold();
        if gap < threshold || gap <= 0.0 {
            return Err(Error::DegeneracyTooClose { gap, threshold });
        }
        let mut u = es.vectors[0];
        if let Some(g) = self.regauge {
            let phase = C64::from_polar(1.0, g(pt));
            u = u.map(|c| c * phase);
        }
        Ok(u)
    }

    pub fn state(&self, pt: &PhasePoint) -> Result<GaugeFixedState> {
        gauge_fix_vector(&self.raw_ground_state(pt)?)
    }

    /// `B_{μν}` at `pt` in an explicit chart, principal branch at `pt`.
    pub fn connection_in_chart(&self, pt: &PhasePoint, mu: Axis, nu: Axis, chart: Chart) -> Result<C64> {
        let geo = Geometry {
            chart_rule: ChartRule::Fixed(chart),
            ..*self
        };
        let mut st = Stencil::new(&geo, *pt)?;
        st.connection([0; 4], mu, nu)
    }

    /// `H_{μνλ}` before the imaginary part is discarded.
    pub fn curvature_complex(&self, pt: &PhasePoint, mu: Axis, nu: Axis, lam: Axis) -> Result<C64> {
        Ok(Stencil::new(self, *pt)?.curvature(mu, nu, lam)?.0)
    }

    pub fn curvature(&self, pt: &PhasePoint, mu: Axis, nu: Axis, lam: Axis) -> Result<f64> {
        let (z, scale) = Stencil::new(self, *pt)?.curvature(mu, nu, lam)?;
        self.check_real(z, scale)
    }

    /// The imaginary part is a finite-difference artifact of order `(h/d)²`
    /// relative to the individual cyclic terms, `d` the distance to the
    /// nearest degeneracy.
    fn check_real(&self, z: C64, scale: f64) -> Result<f64> {
        let bound = self.imag_rel * scale.max(z.re.abs()) + self.imag_abs;
        if z.im.abs() > bound {
            return Err(Error::ImaginaryResidue {
                residue: z.im.abs(),
                bound,
            });
        }
        Ok(z.re)
    }

    /// `(H_xyz, H_xyw, H_xzw, H_yzw)` from one shared stencil.
    pub fn curvature_all(&self, pt: &PhasePoint) -> Result<[f64; 4]> {
        let mut st = Stencil::new(self, *pt)?;
        let mut out = [0.0; 4];
        for (o, [a, b, c]) in out.iter_mut().zip(COMPONENTS) {
            let (z, scale) = st.curvature(a, b, c)?;
            *o = self.check_real(z, scale)?;
        }
        Ok(out)
    }

    /// Curvature as a flux vector: the outward normal component on a face
    /// orthogonal to axis `γ` is `F_γ`. `F = (-H_yzw, H_xzw, -H_xyw, H_xyz)`.
    pub fn flux(&self, pt: &PhasePoint) -> Result<[f64; 4]> {
        let [xyz, xyw, xzw, yzw] = self.curvature_all(pt)?;
        Ok([-yzw, xzw, -xyw, xyz])
    }

    /// Quantum geometric tensor `Q_{μν} = Tr(P·∂_μP·∂_νP)` of the lowest band.
    pub fn qgt(&self, pt: &PhasePoint, h: f64) -> Result<[[C64; 4]; 4]> {
        let proj = |p: &PhasePoint| -> Result<[[C64; 3]; 3]> {
            let u = self.raw_ground_state(p)?;
            let mut m = [[C64::new(0.0, 0.0); 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] = u[i] * u[j].conj();
                }
            }
            Ok(m)
        };
        let p0 = proj(pt)?;
        let mut d = [[[C64::new(0.0, 0.0); 3]; 3]; 4];
        for a in Axis::ALL {
            let pp = proj(&pt.shifted(a, h))?;
            let pm = proj(&pt.shifted(a, -h))?;
            for i in 0..3 {
                for j in 0..3 {
                    d[a.index()][i][j] = (pp[i][j] - pm[i][j]) / (2.0 * h);
                }
            }
        }
        let mut q = [[C64::new(0.0, 0.0); 4]; 4];
        for mu in 0..4 {
            for nu in 0..4 {
                q[mu][nu] = trace3(&matmul3(&matmul3(&p0, &d[mu]), &d[nu]));
            }
        }
        Ok(q)
    }
}

fn matmul3(a: &[[C64; 3]; 3], b: &[[C64; 3]; 3]) -> [[C64; 3]; 3] {
    let mut c = [[C64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    c
}

fn trace3(a: &[[C64; 3]; 3]) -> C64 {
    a[0][0] + a[1][1] + a[2][2]
}

/// `B_{μν}` with an inner step `h_inner`, standard chart unless `|v2|` is tiny.
pub fn tensor_connection(model: &Model, pt: &PhasePoint, mu: Axis, nu: Axis, h_inner: f64) -> Result<C64> {
    if !(h_inner > 0.0) {
        return Err(Error::InvalidParameter("inner step must be positive".into()));
    }
    let geo = Geometry::new(model).with_steps(Steps {
        outer: h_inner,
        inner: h_inner,
    });
    let state = geo.state(pt)?;
    let chart = if state.v2.norm() < SWAP_THRESHOLD {
        Chart::Swapped
    } else {
        Chart::Standard
    };
    geo.connection_in_chart(pt, mu, nu, chart)
}

/// `H_{μνλ}` at `pt` with the given outer and inner steps.
pub fn tensor_curvature(
    model: &Model,
    pt: &PhasePoint,
    axes: [Axis; 3],
    h_outer: f64,
    h_inner: f64,
) -> Result<f64> {
    if !(h_outer > 0.0 && h_inner > 0.0) {
        return Err(Error::InvalidParameter("finite-difference steps must be positive".into()));
    }
    let [mu, nu, lam] = axes;
    Geometry::new(model)
        .with_steps(Steps {
            outer: h_outer,
            inner: h_inner,
        })
        .curvature(pt, mu, nu, lam)
}

/// Sign of the permutation taking `(x, y, z, w)` to `idx`, zero on repeats.
pub fn levi_civita4(idx: [usize; 4]) -> i32 {
    let mut sign = 1;
    for i in 0..4 {
        for j in (i + 1)..4 {
            if idx[i] == idx[j] {
                return 0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// `ε_{μνλγ}·q_γ/|q|⁴`, summed over `γ`.
pub fn analytic_curvature_canonical(q: QVector, axes: [Axis; 3]) -> Result<f64> {
    let n = q.norm();
    if n == 0.0 {
        return Err(Error::SingularPoint);
    }
    let qa = q.to_array();
    let [a, b, c] = axes.map(Axis::index);
    let s: f64 = (0..4)
        .map(|g| levi_civita4([a, b, c, g]) as f64 * qa[g])
        .sum();
    Ok(s / n.powi(4))
}

/// Quantum geometric tensor with default thresholds.
pub fn qgt(model: &Model, pt: &PhasePoint, h: f64) -> Result<[[C64; 4]; 4]> {
    Geometry::new(model).qgt(pt, h)
}

/// Overlap magnitude `|⟨a|b⟩|` of two gauge-fixed states.
pub fn fidelity(a: &GaugeFixedState, b: &GaugeFixedState) -> f64 {
    inner(&a.vector(), &b.vector()).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::gellmann_compose;
    use crate::models::{CanonicalChart, CircuitParams};
    use approx::assert_abs_diff_eq;

    fn canonical() -> Model {
        Model::Canonical(CanonicalChart::identity())
    }

    /// Closed-form state and its analytic phase derivatives for the identity chart.
    struct Exact {
        v1: C64,
        v2: C64,
        dv1: [C64; 4],
        dv2: [C64; 4],
    }

    fn exact(q: [f64; 4]) -> Exact {
        let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
        let a = C64::new(q[0], -q[1]);
        let b = C64::new(q[2], -q[3]);
        let da = [C64::new(1.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let db = [C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, -1.0)];
        let mut dv1 = [C64::new(0.0, 0.0); 4];
        let mut dv2 = [C64::new(0.0, 0.0); 4];
        for m in 0..4 {
            dv1[m] = da[m] / n - a * q[m] / n.powi(3);
            dv2[m] = db[m] / n - b * q[m] / n.powi(3);
        }
        Exact {
            v1: a / n,
            v2: b / n,
            dv1,
            dv2,
        }
    }

    fn exact_connection(q: [f64; 4], mu: usize, nu: usize) -> C64 {
        let e = exact(q);
        let alpha = [-I * e.v2.ln(), e.v1.conj(), e.v1];
        let d = |m: usize| [-I * e.dv2[m] / e.v2, e.dv1[m].conj(), e.dv1[m]];
        connection_from_fields(&alpha, &d(mu), &d(nu))
    }

    #[test]
    fn gauge_fixed_examples() {
        let s = ground_state_gauge_fixed(&gellmann_compose(QVector::new(1.0, 0.0, 0.0, 0.0))).unwrap();
        assert!((s.v1 - C64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(s.v2.norm() < 1e-12);

        let s = ground_state_gauge_fixed(&gellmann_compose(QVector::new(0.0, 0.0, 0.0, 1.0))).unwrap();
        assert!(s.v1.norm() < 1e-12);
        assert!((s.v2 - C64::new(0.0, -1.0)).norm() < 1e-12);

        for c in [0.01, 1.0, 37.0] {
            let s = ground_state_gauge_fixed(&gellmann_compose(QVector::new(3.0 * c, 4.0 * c, 0.0, 0.0))).unwrap();
            assert!((s.v1 - C64::new(0.6, -0.8)).norm() < 1e-12);
            assert!(s.v2.norm() < 1e-12);
        }
    }

    #[test]
    fn gauge_fixed_state_is_eigenvector() {
        let h = gellmann_compose(QVector::new(0.3, -0.7, 1.1, 0.4));
        let s = ground_state_gauge_fixed(&h).unwrap();
        assert!((s.v1.norm_sqr() + s.v2.norm_sqr() - 1.0).abs() < 1e-9);
        let v = s.vector();
        let hv = h.apply(&v);
        let e = -QVector::new(0.3, -0.7, 1.1, 0.4).norm();
        let res: f64 = (0..3).map(|i| (hv[i] - e * v[i]).norm_sqr()).sum::<f64>().sqrt();
        assert!(res <= 1e-8 * h.frobenius_norm());
        assert_eq!(v[1], C64::new(-FRAC_1_SQRT_2, 0.0));
    }

    #[test]
    fn gauge_fixing_errors() {
        assert!(matches!(
            ground_state_gauge_fixed(&Hermitian3::zeros()),
            Err(Error::DegenerateGroundState { .. })
        ));
        let h = Hermitian3::diagonal([1.0, 0.0, 2.0]);
        assert!(matches!(ground_state_gauge_fixed(&h), Err(Error::NotChiral { .. })));
    }

    #[test]
    fn alpha_field_invariants() {
        let s = ground_state_gauge_fixed(&gellmann_compose(QVector::new(0.3, -0.7, 1.1, 0.4))).unwrap();
        let a = alpha_fields(&s, Chart::Standard, None);
        assert_eq!(a.alpha2, a.alpha3.conj());
        assert!(((I * a.alpha1).exp() - s.v2).norm() < 1e-10);
        // unwrapping against a far-away branch lands within π of it
        let b = alpha_fields(&s, Chart::Standard, Some(a.alpha1.re + 4.0 * PI));
        assert_abs_diff_eq!(b.alpha1.re, a.alpha1.re + 4.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn connection_antisymmetric_and_diagonal_zero() {
        let m = canonical();
        let pt = PhasePoint::new(0.3, 0.2, 0.5, 0.1);
        for a in Axis::ALL {
            assert_eq!(tensor_connection(&m, &pt, a, a, 1e-3).unwrap(), C64::new(0.0, 0.0));
            for b in Axis::ALL {
                let ab = tensor_connection(&m, &pt, a, b, 1e-3).unwrap();
                let ba = tensor_connection(&m, &pt, b, a, 1e-3).unwrap();
                assert!((ab + ba).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn connection_matches_closed_form() {
        let m = canonical();
        let q = [0.3, 0.2, 0.5, 0.1];
        let pt = PhasePoint(q);
        for mu in 0..4 {
            for nu in 0..4 {
                let num = tensor_connection(&m, &pt, Axis::from_index(mu), Axis::from_index(nu), 1e-3).unwrap();
                let ex = exact_connection(q, mu, nu);
                assert!((num - ex).norm() < 1e-5, "B[{mu}{nu}] {num} vs {ex}");
            }
        }
    }

    #[test]
    fn literal_cyclic_sum_is_twice_the_analytic_form() {
        // fixes CURVATURE_NORMALIZATION
        let m = canonical();
        let mut geo = Geometry::new(&m);
        geo.normalization = 1.0;
        let q = QVector::new(0.0, 0.0, 0.0, 1.0);
        let lit = geo.curvature(&PhasePoint(q.to_array()), Axis::X, Axis::Y, Axis::Z).unwrap();
        let an = analytic_curvature_canonical(q, [Axis::X, Axis::Y, Axis::Z]).unwrap();
        assert!((lit / an - 2.0).abs() < 1e-5, "{lit} vs {an}");
        assert_eq!(CURVATURE_NORMALIZATION, 0.5);
    }

    #[test]
    fn analytic_examples() {
        let xyz = [Axis::X, Axis::Y, Axis::Z];
        assert_eq!(analytic_curvature_canonical(QVector::new(0.0, 0.0, 0.0, 1.0), xyz).unwrap(), 1.0);
        assert_eq!(analytic_curvature_canonical(QVector::new(0.0, 0.0, 0.0, 2.0), xyz).unwrap(), 0.125);
        let xyw = [Axis::X, Axis::Y, Axis::W];
        assert_eq!(analytic_curvature_canonical(QVector::new(1.0, 1.0, 1.0, 1.0), xyw).unwrap(), -1.0 / 16.0);
        assert!(matches!(
            analytic_curvature_canonical(QVector::default(), xyz),
            Err(Error::SingularPoint)
        ));
        assert_eq!(levi_civita4([0, 1, 2, 3]), 1);
        assert_eq!(levi_civita4([0, 1, 3, 2]), -1);
        assert_eq!(levi_civita4([0, 0, 3, 2]), 0);
    }

    #[test]
    fn curvature_repeated_index_is_zero() {
        let m = canonical();
        let pt = PhasePoint::new(0.3, 0.2, 0.5, 0.1);
        assert_eq!(tensor_curvature(&m, &pt, [Axis::X, Axis::X, Axis::Z], 1e-3, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn curvature_totally_antisymmetric() {
        let m = Model::Circuit(CircuitParams::equal(1.0));
        let geo = Geometry::new(&m);
        let pt = PhasePoint::new(1.7, -3.9, 2.4, -4.4);
        let base = geo.curvature(&pt, Axis::X, Axis::Y, Axis::W).unwrap();
        let perms = [
            ([Axis::Y, Axis::X, Axis::W], -1.0),
            ([Axis::Y, Axis::W, Axis::X], 1.0),
            ([Axis::W, Axis::Y, Axis::X], -1.0),
            ([Axis::W, Axis::X, Axis::Y], 1.0),
            ([Axis::X, Axis::W, Axis::Y], -1.0),
        ];
        for (p, s) in perms {
            let v = geo.curvature(&pt, p[0], p[1], p[2]).unwrap();
            assert!((v - s * base).abs() < 1e-8 * base.abs().max(1.0));
        }
    }

    #[test]
    fn charts_agree_on_curvature_but_not_connection() {
        let m = Model::Circuit(CircuitParams::equal(1.0));
        let pt = PhasePoint::new(1.9, -4.0, 2.3, -4.3);
        let std = Geometry::new(&m).with_chart(Chart::Standard);
        let swp = Geometry::new(&m).with_chart(Chart::Swapped);
        let b_std = std.connection_in_chart(&pt, Axis::X, Axis::Y, Chart::Standard).unwrap();
        let b_swp = swp.connection_in_chart(&pt, Axis::X, Axis::Y, Chart::Swapped).unwrap();
        assert!((b_std - b_swp).norm() > 1e-3);
        // the charts differ only by finite-difference truncation, O(h²)
        let diff = |s: Steps| {
            let a = std.with_steps(s).curvature_all(&pt).unwrap();
            let b = swp.with_steps(s).curvature_all(&pt).unwrap();
            (0..4).map(|k| (a[k] - b[k]).abs() / a[k].abs().max(1.0)).fold(0.0, f64::max)
        };
        let coarse = diff(Steps::uniform(1e-3));
        let fine = diff(Steps::uniform(5e-4));
        assert!(coarse < 1e-4, "{coarse}");
        assert!(fine < coarse / 3.0, "{fine} vs {coarse}");
    }

    #[test]
    fn branch_shift_changes_connection_only() {
        // α1 → α1 + 2π is an exact shift of B
        let m = Model::Circuit(CircuitParams::equal(1.0));
        let pt = PhasePoint::new(1.9, -4.0, 2.3, -4.3);
        let geo = Geometry::new(&m).with_chart(Chart::Standard);
        let s = geo.state(&pt).unwrap();
        let a0 = alpha_fields(&s, Chart::Standard, None);
        let a1 = alpha_fields(&s, Chart::Standard, Some(a0.alpha1.re + 2.0 * PI));
        let d = [C64::new(0.1, 0.2), C64::new(0.3, -0.1), C64::new(0.3, 0.1)];
        let e = [C64::new(-0.2, 0.1), C64::new(0.05, 0.4), C64::new(0.05, -0.4)];
        let b0 = connection_from_fields(&a0.as_array(), &d, &e);
        let b1 = connection_from_fields(&a1.as_array(), &d, &e);
        assert!((b1 - b0).norm() > 1e-3);
    }

    #[test]
    fn qgt_structure_and_gauge_invariance() {
        let m = Model::Circuit(CircuitParams::equal(1.0));
        let pt = PhasePoint::new(0.4, -1.3, 2.7, 0.9);
        let q = qgt(&m, &pt, 1e-4).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!((q[a][b] - q[b][a].conj()).norm() < 1e-12);
            }
        }
        let g: Regauge = |p| 0.7 * p.0[0] + 0.3 * p.0[1].sin();
        let qg = Geometry::new(&m).with_regauge(g).qgt(&pt, 1e-4).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                assert!((q[a][b] - qg[a][b]).norm() < 1e-8);
            }
        }
        let re = nalgebra::Matrix4::from_fn(|i, j| q[i][j].re);
        let ev = re.symmetric_eigen().eigenvalues;
        assert!(ev.iter().all(|&e| e > -1e-9));
    }

    #[test]
    fn qgt_matches_closed_form_on_canonical() {
        let m = canonical();
        let q = [0.5, -0.3, 0.6, 0.548_178_802_983_2];
        let pt = PhasePoint(q);
        let num = qgt(&m, &pt, 1e-4).unwrap();
        let e = exact(q);
        let psi = [e.v1 * FRAC_1_SQRT_2, C64::new(-FRAC_1_SQRT_2, 0.0), e.v2 * FRAC_1_SQRT_2];
        let dpsi = |m: usize| [e.dv1[m] * FRAC_1_SQRT_2, C64::new(0.0, 0.0), e.dv2[m] * FRAC_1_SQRT_2];
        for a in 0..4 {
            for b in 0..4 {
                let ex = inner(&dpsi(a), &dpsi(b)) - inner(&dpsi(a), &psi) * inner(&psi, &dpsi(b));
                assert!((num[a][b] - ex).norm() < 1e-5, "Q[{a}{b}] {} vs {}", num[a][b], ex);
            }
        }
        let eig = |f: &dyn Fn(usize, usize) -> f64| {
            let mut v: Vec<f64> = nalgebra::Matrix4::from_fn(|i, j| f(i, j))
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let en = eig(&|i, j| num[i][j].re);
        let ee = eig(&|i, j| (inner(&dpsi(i), &dpsi(j)) - inner(&dpsi(i), &psi) * inner(&psi, &dpsi(j))).re);
        for k in 0..4 {
            assert!((en[k] - ee[k]).abs() < 1e-5);
        }
    }

    #[test]
    fn degeneracy_is_rejected() {
        let m = canonical();
        let err = tensor_curvature(&m, &PhasePoint::default(), [Axis::X, Axis::Y, Axis::Z], 1e-3, 1e-3);
        assert!(matches!(err, Err(Error::DegeneracyTooClose { .. })));
    }
}
