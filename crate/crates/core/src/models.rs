//! Three-level Hamiltonians over the four-dimensional phase space.
//!
//! Three families share one interface, [`Model::hamiltonian`]:
//!
//! * [`CanonicalChart`]: `q·λ` composed with an affine chart `q = M·(φ - φ0)`.
//! * [`CircuitParams`]: the low-energy charge model of three superconducting
//!   islands in the basis `(|L⟩, |0⟩, |R⟩)`.
//! * [`TripleDotParams`]: the effective single-particle Hamiltonian of three
//!   dots coupled through superconducting leads, basis `(|L⟩, |M⟩, |R⟩)`.
//!
//! The chiral regime (offset charges at 1/2, equal dot energies) maps onto the
//! canonical form with `H[0][1] = qx - i·qy` and `H[1][2] = qz + i·qw`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::{gellmann_compose, Hermitian3, QVector, C64};
use crate::error::{Error, Result};

/// One of the four phase directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
    W,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::X, Axis::Y, Axis::Z, Axis::W];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Axis {
        Self::ALL[i]
    }

    pub fn name(self) -> &'static str {
        ["x", "y", "z", "w"][self.index()]
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            "w" => Ok(Axis::W),
            other => Err(Error::InvalidParameter(format!("unknown axis '{other}'"))),
        }
    }
}

/// A point `(φx, φy, φz, φw)` in phase space, radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhasePoint(pub [f64; 4]);

impl PhasePoint {
    pub const fn new(x: f64, y: f64, z: f64, w: f64) -> Self {
        Self([x, y, z, w])
    }

    pub fn get(&self, a: Axis) -> f64 {
        self.0[a.index()]
    }

    pub fn set(&mut self, a: Axis, v: f64) {
        self.0[a.index()] = v;
    }

    /// Copy displaced by `h` along `a`.
    pub fn shifted(&self, a: Axis, h: f64) -> Self {
        let mut p = *self;
        p.0[a.index()] += h;
        p
    }

    pub fn offset(&self, d: &[f64; 4]) -> Self {
        let mut p = *self;
        for (c, x) in p.0.iter_mut().zip(d) {
            *c += x;
        }
        p
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Euclidean distance on the torus, each coordinate taken modulo 2π.
    pub fn torus_distance(&self, other: &PhasePoint) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| wrap_phase(a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl FromStr for PhasePoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = parse_list(s)?;
        if parts.len() != 4 {
            return Err(Error::InvalidParameter(format!(
                "phase point needs 4 components, got {}",
                parts.len()
            )));
        }
        Ok(PhasePoint([parts[0], parts[1], parts[2], parts[3]]))
    }
}

/// Parses comma-separated reals; accepts `pi`, `2pi/3`, `-4pi/3` style tokens.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_real).collect()
}

pub fn parse_real(tok: &str) -> Result<f64> {
    let t = tok.trim().to_ascii_lowercase();
    if let Ok(v) = t.parse::<f64>() {
        return Ok(v);
    }
    let bad = || Error::InvalidParameter(format!("cannot parse '{tok}' as a real number"));
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (t.as_str(), 1.0),
    };
    let Some(pre) = num.strip_suffix("pi") else {
        return Err(bad());
    };
    let pre = pre.trim().trim_end_matches('*');
    let coeff = match pre {
        "" | "+" => 1.0,
        "-" => -1.0,
        p => p.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(coeff * PI / den)
}

/// Maps an angle into `(-π, π]`.
pub fn wrap_phase(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Affine chart `q = M·(φ - origin)` for the canonical model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalChart {
    pub origin: PhasePoint,
    /// Row `i` maps the phase offset to component `i` of `q`.
    pub matrix: [[f64; 4]; 4],
}

impl Default for CanonicalChart {
    fn default() -> Self {
        Self::identity()
    }
}

impl CanonicalChart {
    pub fn identity() -> Self {
        Self::scaled(PhasePoint::default(), 1.0)
    }

    pub fn scaled(origin: PhasePoint, scale: f64) -> Self {
        let mut matrix = [[0.0; 4]; 4];
        for (i, row) in matrix.iter_mut().enumerate() {
            row[i] = scale;
        }
        Self { origin, matrix }
    }

    pub fn q(&self, pt: &PhasePoint) -> QVector {
        let mut q = [0.0; 4];
        for (qi, row) in q.iter_mut().zip(self.matrix.iter()) {
            *qi = (0..4).map(|j| row[j] * (pt.0[j] - self.origin.0[j])).sum();
        }
        QVector::from_array(q)
    }

    pub fn determinant(&self) -> f64 {
        nalgebra::Matrix4::from_fn(|i, j| self.matrix[i][j]).determinant()
    }
}

/// Parameters of the three-island charge circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    /// Josephson energies of the left junctions `(E_JL1, E_JL2, E_JL3)`.
    pub ej_l: [f64; 3],
    /// Josephson energies of the right junctions `(E_JR1, E_JR2, E_JR3)`.
    pub ej_r: [f64; 3],
    /// Charging energy `E_C = (2e)²/2C`.
    pub e_c: f64,
    pub ng_l: f64,
    pub ng_r: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self::equal(1.0)
    }
}

impl CircuitParams {
    /// Equal Josephson energies `ej` on all six junctions, charge-degenerate offsets.
    pub fn equal(ej: f64) -> Self {
        Self {
            ej_l: [ej; 3],
            ej_r: [ej; 3],
            e_c: 50.0,
            ng_l: 0.5,
            ng_r: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = self.ej_l.iter().chain(self.ej_r.iter());
        if all.clone().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::InvalidParameter(
                "Josephson energies must be finite and strictly positive".into(),
            ));
        }
        if !(self.e_c.is_finite() && self.e_c > 0.0) {
            return Err(Error::InvalidParameter("charging energy must be positive".into()));
        }
        if !(self.ng_l.is_finite() && self.ng_r.is_finite()) {
            return Err(Error::InvalidParameter("offset charges must be finite".into()));
        }
        Ok(())
    }

    pub fn is_chiral(&self) -> bool {
        (self.ng_l - 0.5).abs() < 1e-12 && (self.ng_r - 0.5).abs() < 1e-12
    }

    /// Copy with every Josephson energy multiplied by `scale`.
    pub fn scaled_josephson(&self, scale: f64) -> Self {
        let mut p = *self;
        p.ej_l.iter_mut().chain(p.ej_r.iter_mut()).for_each(|e| *e *= scale);
        p
    }
}

/// Sign convention for the lead-mediated couplings of the triple dot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignConvention {
    /// Both lead terms negative, consistent with the self-energy and the
    /// `±arccos(v/2Γ)` degeneracy positions.
    #[default]
    Corrected,
    /// `+Γy`, `+Γw` as printed in the main-text coupling formulas.
    MainText,
}

impl FromStr for SignConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "corrected" => Ok(Self::Corrected),
            "main-text" | "maintext" => Ok(Self::MainText),
            o => Err(Error::InvalidParameter(format!("unknown sign convention '{o}'"))),
        }
    }
}

/// Parameters of the triple-dot chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TripleDotParams {
    pub v_l: f64,
    pub v_r: f64,
    /// Non-local couplings `(Γx, Γy, Γz, Γw)`, energy units.
    pub gamma: [f64; 4],
    /// Dot energies `(ε_L, ε_M, ε_R)`.
    pub eps: [f64; 3],
    #[serde(default)]
    pub convention: SignConvention,
}

impl Default for TripleDotParams {
    fn default() -> Self {
        Self::symmetric(1.0, 1.0)
    }
}

impl TripleDotParams {
    pub fn symmetric(v: f64, gamma: f64) -> Self {
        Self {
            v_l: v,
            v_r: v,
            gamma: [gamma; 4],
            eps: [0.0; 3],
            convention: SignConvention::Corrected,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::InvalidParameter("Γ couplings must be strictly positive".into()));
        }
        if !(self.v_l.is_finite() && self.v_r.is_finite()) || self.eps.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter("dot couplings and energies must be finite".into()));
        }
        Ok(())
    }

    pub fn is_chiral(&self) -> bool {
        let [a, b, c] = self.eps;
        let scale = 1e-12 * (1.0 + a.abs().max(b.abs()).max(c.abs()));
        (a - b).abs() <= scale && (b - c).abs() <= scale
    }
}

/// `(f_L, f_R)` of the circuit.
pub fn circuit_couplings(p: &CircuitParams, pt: &PhasePoint) -> (C64, C64) {
    let [x, y, z, w] = pt.0;
    let f_l = C64::new(p.ej_l[0], 0.0)
        + C64::from_polar(p.ej_l[1], x)
        + C64::from_polar(p.ej_l[2], x + y);
    let f_r = C64::new(p.ej_r[0], 0.0)
        + C64::from_polar(p.ej_r[1], z)
        + C64::from_polar(p.ej_r[2], z + w);
    (f_l, f_r)
}

/// Low-energy circuit Hamiltonian in `(|L⟩, |0⟩, |R⟩)`:
/// charging offsets on the diagonal, `-f_L|L⟩⟨0| - f_R|0⟩⟨R| + h.c.`
pub fn circuit_low_energy_h(p: &CircuitParams, pt: &PhasePoint) -> Hermitian3 {
    let (f_l, f_r) = circuit_couplings(p, pt);
    let d = [
        p.e_c / 3.0 * (1.0 - 2.0 * p.ng_l),
        0.0,
        p.e_c / 3.0 * (1.0 - 2.0 * p.ng_r),
    ];
    Hermitian3::from_upper(d, -f_l, C64::new(0.0, 0.0), -f_r)
}

/// Dense charge-basis Hamiltonian truncated to `n_L, n_R ∈ [-cutoff, cutoff]`.
///
/// Basis index is `(n_L + cutoff)·(2·cutoff + 1) + (n_R + cutoff)`. Each
/// junction contributes `-E_J(e^{iφ̂}e^{-iθ} + h.c.)`, so the hopping between
/// neighbouring charge states carries the full `f_L`, `f_R` amplitudes of
/// [`circuit_low_energy_h`]. `E_C/3` multiplies the squared charge offsets,
/// which fixes the three-state block to the low-energy model up to a constant.
pub fn circuit_full_h(p: &CircuitParams, pt: &PhasePoint, cutoff: usize) -> Result<DMatrix<C64>> {
    if cutoff < 1 {
        return Err(Error::CutoffTooSmall(cutoff));
    }
    let c = cutoff as i64;
    let side = (2 * cutoff + 1) as usize;
    let dim = side * side;
    let idx = |nl: i64, nr: i64| ((nl + c) as usize) * side + (nr + c) as usize;
    let (f_l, f_r) = circuit_couplings(p, pt);
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for nl in -c..=c {
        for nr in -c..=c {
            let i = idx(nl, nr);
            let charging = p.e_c / 3.0 * ((nl as f64 - p.ng_l).powi(2) + (nr as f64 - p.ng_r).powi(2));
            h[(i, i)] = C64::new(charging, 0.0);
            // ⟨n_L+1|H|n_L⟩ = -f_L
            if nl < c {
                let j = idx(nl + 1, nr);
                h[(j, i)] = -f_l;
                h[(i, j)] = -f_l.conj();
            }
            // ⟨n_R-1|H|n_R⟩ = -f_R
            if nr > -c {
                let j = idx(nl, nr - 1);
                h[(j, i)] = -f_r;
                h[(i, j)] = -f_r.conj();
            }
        }
    }
    Ok(h)
}

/// Ascending eigenvalues of [`circuit_full_h`].
pub fn circuit_full_spectrum(p: &CircuitParams, pt: &PhasePoint, cutoff: usize) -> Result<Vec<f64>> {
    let h = circuit_full_h(p, pt, cutoff)?;
    let eig = nalgebra::SymmetricEigen::new(h);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Constant separating [`circuit_full_h`] from [`circuit_low_energy_h`]:
/// the charging energy of `|0, 0⟩`.
pub fn circuit_full_offset(p: &CircuitParams) -> f64 {
    p.e_c / 3.0 * (p.ng_l.powi(2) + p.ng_r.powi(2))
}

/// `(f_LM, f_MR)` of the triple dot under the configured sign convention.
pub fn tripledot_couplings(p: &TripleDotParams, pt: &PhasePoint) -> (C64, C64) {
    let [x, y, z, w] = pt.0;
    let [gx, gy, gz, gw] = p.gamma;
    let sign = match p.convention {
        SignConvention::Corrected => -1.0,
        SignConvention::MainText => 1.0,
    };
    let f_lm = C64::new(p.v_l, 0.0) - C64::from_polar(gx, -x) + sign * C64::from_polar(gy, -y);
    let f_mr = C64::new(p.v_r, 0.0) - C64::from_polar(gz, z) + sign * C64::from_polar(gw, w);
    (f_lm, f_mr)
}

/// Triple-dot Hamiltonian in `(|L⟩, |M⟩, |R⟩)` with the trace removed:
/// `f_LM|M⟩⟨L| + f_MR|R⟩⟨M| + h.c.`
pub fn tripledot_h(p: &TripleDotParams, pt: &PhasePoint) -> Hermitian3 {
    let (f_lm, f_mr) = tripledot_couplings(p, pt);
    let mut h = Hermitian3::diagonal(p.eps);
    h.set_offdiag(1, 0, f_lm);
    h.set_offdiag(2, 1, f_mr);
    h.traceless()
}

/// First-order expansion of the triple-dot couplings around the monopole
/// labelled `(s1, s2)`, expressed as the canonical `q` vector.
///
/// Requires symmetric couplings (`v_L = v_R`, all `Γ` equal) with `0 < v < 2Γ`.
/// The imaginary parts carry no `s` label: with both lead terms negative the
/// expansion of `f_LM` is `s1·Γ·sinθ·(δx - δy) + i·(v/2)·(δx + δy)`.
pub fn linearized_q(p: &TripleDotParams, s1: i8, s2: i8, dpt: &[f64; 4]) -> Result<QVector> {
    let m = linearized_matrix(p, s1, s2)?;
    let mut q = [0.0; 4];
    for (qi, row) in q.iter_mut().zip(m.iter()) {
        *qi = (0..4).map(|j| row[j] * dpt[j]).sum();
    }
    Ok(QVector::from_array(q))
}

/// Jacobian `∂q/∂φ` of [`linearized_q`].
pub fn linearized_matrix(p: &TripleDotParams, s1: i8, s2: i8) -> Result<[[f64; 4]; 4]> {
    let (v, gamma) = symmetric_couplings(p)?;
    if !(v > 0.0 && v < 2.0 * gamma) {
        return Err(Error::OutsideTopologicalRegion { v, gamma });
    }
    if s1.abs() != 1 || s2.abs() != 1 {
        return Err(Error::InvalidParameter("monopole labels must be ±1".into()));
    }
    let re = gamma * (1.0 - (v / (2.0 * gamma)).powi(2)).sqrt();
    let im = v / 2.0;
    let (s1, s2) = (s1 as f64, s2 as f64);
    Ok([
        [s1 * re, -s1 * re, 0.0, 0.0],
        [im, im, 0.0, 0.0],
        [0.0, 0.0, s2 * re, -s2 * re],
        [0.0, 0.0, im, im],
    ])
}

fn symmetric_couplings(p: &TripleDotParams) -> Result<(f64, f64)> {
    let g = p.gamma[0];
    let tol = 1e-12 * g.abs().max(1.0);
    if (p.v_l - p.v_r).abs() > tol || p.gamma.iter().any(|x| (x - g).abs() > tol) {
        return Err(Error::InvalidParameter(
            "linearization needs v_L = v_R and equal Γ couplings".into(),
        ));
    }
    Ok((p.v_l, g))
}

/// Any of the three Hamiltonian families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum Model {
    Canonical(CanonicalChart),
    Circuit(CircuitParams),
    TripleDot(TripleDotParams),
}

impl Model {
    pub fn hamiltonian(&self, pt: &PhasePoint) -> Hermitian3 {
        match self {
            Model::Canonical(chart) => gellmann_compose(chart.q(pt)),
            Model::Circuit(p) => circuit_low_energy_h(p, pt),
            Model::TripleDot(p) => tripledot_h(p, pt),
        }
    }

    /// The two off-diagonal couplings `(left, right)` whose simultaneous
    /// zeros are the triple degeneracies.
    pub fn side_couplings(&self, pt: &PhasePoint) -> (C64, C64) {
        match self {
            Model::Canonical(chart) => {
                let q = chart.q(pt);
                (C64::new(q.qx, -q.qy), C64::new(q.qz, q.qw))
            }
            Model::Circuit(p) => circuit_couplings(p, pt),
            Model::TripleDot(p) => tripledot_couplings(p, pt),
        }
    }

    /// Typical energy of the couplings, used to scale tolerances.
    pub fn coupling_scale(&self) -> f64 {
        match self {
            Model::Canonical(chart) => chart
                .matrix
                .iter()
                .flatten()
                .fold(0.0_f64, |a, b| a.max(b.abs()))
                .max(f64::MIN_POSITIVE),
            Model::Circuit(p) => p.ej_l.iter().chain(p.ej_r.iter()).fold(0.0, |a, b| a.max(*b)),
            Model::TripleDot(p) => p
                .gamma
                .iter()
                .chain([p.v_l.abs(), p.v_r.abs()].iter())
                .fold(0.0, |a, b| a.max(*b)),
        }
    }

    pub fn is_chiral(&self) -> bool {
        match self {
            Model::Canonical(_) => true,
            Model::Circuit(p) => p.is_chiral(),
            Model::TripleDot(p) => p.is_chiral(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Canonical(chart) => {
                if chart.matrix.iter().flatten().any(|x| !x.is_finite()) || !chart.origin.is_finite() {
                    return Err(Error::InvalidParameter("chart must be finite".into()));
                }
                Ok(())
            }
            Model::Circuit(p) => p.validate(),
            Model::TripleDot(p) => p.validate(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Canonical(_) => "canonical",
            Model::Circuit(_) => "circuit",
            Model::TripleDot(_) => "tripledot",
        }
    }
}
