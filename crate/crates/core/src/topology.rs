//! Triple degeneracies, region classification and Dixmier-Douady charges.
//!
//! The charge of a closed 3-surface `S` is `Q = (1/2π²)·∮_S F·n dS`, where
//! `F = (-H_yzw, H_xzw, -H_xyw, H_xyz)` collects the curvature components
//! normal to each coordinate hyperplane. On the eight faces of a hypercube
//! this is the signed face-pair sum of the four curvature components.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Geometry, Steps, COMPONENTS};
use crate::models::{wrap_phase, Axis, Model, PhasePoint};

/// Margin below which a side is critical.
pub const CRITICAL_MARGIN: f64 = 1e-12;

/// Cube half-width used when none is given, radians.
pub const DEFAULT_HALF_WIDTH: f64 = 0.3;

/// Absolute error floor covering roundoff in the face sums.
const ROUNDOFF_FLOOR: f64 = 1e-9;

const TWO_PI_SQ: f64 = 2.0 * PI * PI;

/// A triple degeneracy of a chiral model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegeneratePoint {
    pub point: PhasePoint,
    /// Signs of the left and right phase solutions.
    pub labels: (i8, i8),
    /// `max(|f_left|, |f_right|)` at `point`.
    pub residual: f64,
    /// Charge predicted from the labels.
    pub expected_charge: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionTag {
    Topological,
    Gapped,
    Critical,
}

/// Classification of one side of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionClass {
    pub tag: RegionTag,
    /// Signed distance to the nearest triangle-inequality bound; negative when gapped.
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChargeMethod {
    CubeQuadrature,
    CubeMonteCarlo,
    SphereMonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CubeMethod {
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeResult {
    pub q_value: f64,
    pub q_rounded: i64,
    pub error_estimate: f64,
    pub method: ChargeMethod,
    /// Number of curvature evaluations, each a full finite-difference stencil.
    pub evaluations: u64,
    /// Cube half-width or sphere radius, radians.
    pub surface_parameter: f64,
}

impl ChargeResult {
    fn accept(self) -> Result<Self> {
        if (self.q_value - self.q_rounded as f64).abs() > 3.0 * self.error_estimate {
            return Err(Error::NotConverged(Box::new(self)));
        }
        Ok(self)
    }

    fn new(q: f64, err: f64, method: ChargeMethod, evaluations: u64, surface_parameter: f64) -> Self {
        Self {
            q_value: q,
            q_rounded: q.round() as i64,
            error_estimate: err,
            method,
            evaluations,
            surface_parameter,
        }
    }
}

/// Signed triangle margin of `a0` against `a1`, `a2`.
pub fn triangle_margin(a0: f64, a1: f64, a2: f64) -> f64 {
    (a1 + a2 - a0).min(a0 - (a1 - a2).abs())
}

fn classify(margin: f64) -> RegionClass {
    let tag = if margin.abs() <= CRITICAL_MARGIN {
        RegionTag::Critical
    } else if margin > 0.0 {
        RegionTag::Topological
    } else {
        RegionTag::Gapped
    };
    RegionClass { tag, margin }
}

/// All `(θ1, θ2)` in `(-π, π]²` with `a0 + a1·e^{iθ1} + a2·e^{iθ2} = 0`.
pub fn solve_phasor_zero(a0: f64, a1: f64, a2: f64) -> Vec<(f64, f64)> {
    if !(a0 > 0.0 && a1 > 0.0 && a2 > 0.0) {
        return Vec::new();
    }
    let margin = triangle_margin(a0, a1, a2);
    if margin < -CRITICAL_MARGIN {
        return Vec::new();
    }
    let c1 = ((a2 * a2 - a0 * a0 - a1 * a1) / (2.0 * a0 * a1)).clamp(-1.0, 1.0);
    let c2 = ((a1 * a1 - a0 * a0 - a2 * a2) / (2.0 * a0 * a2)).clamp(-1.0, 1.0);
    let (t1, t2) = (c1.acos(), c2.acos());
    if margin <= CRITICAL_MARGIN {
        return vec![(wrap_phase(t1), wrap_phase(-t2))];
    }
    vec![(t1, -t2), (-t1, t2)]
}

fn side_amplitudes(m: &Model) -> Option<([f64; 3], [f64; 3])> {
    match m {
        Model::Canonical(_) => None,
        Model::Circuit(p) => Some((p.ej_l, p.ej_r)),
        Model::TripleDot(p) => Some((
            [p.v_l.abs(), p.gamma[0], p.gamma[1]],
            [p.v_r.abs(), p.gamma[2], p.gamma[3]],
        )),
    }
}

/// Left and right region classes.
pub fn classify_region(m: &Model) -> (RegionClass, RegionClass) {
    match side_amplitudes(m) {
        // the canonical chart always has a single source at its origin
        None => {
            let c = classify(1.0);
            (c, c)
        }
        Some((l, r)) => (
            classify(triangle_margin(l[0], l[1], l[2])),
            classify(triangle_margin(r[0], r[1], r[2])),
        ),
    }
}

fn sign(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// Triple degeneracies of a chiral model, ordered by labels `(+,+), (+,-), (-,+), (-,-)`.
pub fn locate_monopoles(m: &Model) -> Result<Vec<DegeneratePoint>> {
    m.validate()?;
    if !m.is_chiral() {
        return Err(Error::NotChiralRegime(match m {
            Model::Circuit(_) => "offset charges must both be 1/2".into(),
            _ => "dot energies must be equal".into(),
        }));
    }
    let residual = |pt: &PhasePoint| {
        let (l, r) = m.side_couplings(pt);
        l.norm().max(r.norm())
    };
    if let Model::Canonical(chart) = m {
        let det = chart.determinant();
        if det == 0.0 {
            return Err(Error::InvalidParameter("canonical chart is singular".into()));
        }
        return Ok(vec![DegeneratePoint {
            point: chart.origin,
            labels: (1, 1),
            residual: residual(&chart.origin),
            expected_charge: if det > 0.0 { 1 } else { -1 },
        }]);
    }
    let (l, r) = side_amplitudes(m).expect("physical model");
    let (cl, cr) = classify_region(m);
    if cl.tag != RegionTag::Topological || cr.tag != RegionTag::Topological {
        return Ok(Vec::new());
    }
    let left = solve_phasor_zero(l[0], l[1], l[2]);
    let right = solve_phasor_zero(r[0], r[1], r[2]);
    let mut out = Vec::with_capacity(4);
    for &(a1, a2) in &left {
        for &(b1, b2) in &right {
            let (point, s1, s2, q) = match m {
                Model::Circuit(_) => {
                    let pt = PhasePoint::new(a1, a2 - a1, b1, b2 - b1);
                    let (s1, s2) = (sign(a1), sign(b1));
                    (pt, s1, s2, -(s1 as i32) * s2 as i32)
                }
                _ => {
                    let pt = PhasePoint::new(
                        wrap_phase(PI - a1),
                        wrap_phase(PI - a2),
                        wrap_phase(b1 - PI),
                        wrap_phase(b2 - PI),
                    );
                    let (s1, s2) = (sign(pt.0[0]), sign(pt.0[2]));
                    (pt, s1, s2, s1 as i32 * s2 as i32)
                }
            };
            out.push(DegeneratePoint {
                point,
                labels: (s1, s2),
                residual: residual(&point),
                expected_charge: q,
            });
        }
    }
    out.sort_by_key(|d| (-d.labels.0, -d.labels.1));
    Ok(out)
}

/// Options shared by the charge integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeOptions {
    pub steps: Steps,
    pub gap_min: f64,
    /// Estimate the finite-difference bias by repeating the coarse pass with halved steps.
    pub fd_bias: bool,
}

impl Default for ChargeOptions {
    fn default() -> Self {
        Self {
            steps: Steps::default(),
            gap_min: crate::geometry::DEFAULT_GAP_MIN,
            fd_bias: true,
        }
    }
}

fn surface_error(e: Error) -> Error {
    match e {
        Error::DegeneracyTooClose { gap, .. } => Error::DegeneracyOnSurface { gap },
        e => e,
    }
}

fn geometry<'m>(m: &'m Model, opts: &ChargeOptions, steps: Steps) -> Geometry<'m> {
    let mut g = Geometry::new(m).with_steps(steps);
    g.gap_min = opts.gap_min;
    g
}

/// Outward flux density through the face orthogonal to `axis` on side `side`.
fn face_flux(geo: &Geometry, pt: &PhasePoint, axis: Axis, side: f64) -> Result<f64> {
    // F_x = -H_yzw, F_y = H_xzw, F_z = -H_xyw, F_w = H_xyz
    let (comp, sign) = match axis {
        Axis::X => (COMPONENTS[3], -1.0),
        Axis::Y => (COMPONENTS[2], 1.0),
        Axis::Z => (COMPONENTS[1], -1.0),
        Axis::W => (COMPONENTS[0], 1.0),
    };
    let h = geo.curvature(pt, comp[0], comp[1], comp[2])?;
    Ok(side * sign * h)
}

/// Point on face `face` (axis `face / 2`, side `±`) from coordinates in `[-1, 1]³`.
fn face_point(center: &PhasePoint, a: f64, face: usize, u: [f64; 3]) -> (PhasePoint, Axis, f64) {
    let axis = Axis::from_index(face / 2);
    let side = if face % 2 == 0 { 1.0 } else { -1.0 };
    let mut d = [0.0; 4];
    let mut k = 0;
    for (i, di) in d.iter_mut().enumerate() {
        if i == axis.index() {
            *di = side * a;
        } else {
            *di = u[k] * a;
            k += 1;
        }
    }
    (center.offset(&d), axis, side)
}

/// Midpoint-rule charge of the cube with `n` nodes per face axis.
fn cube_midpoint(geo: &Geometry, center: &PhasePoint, a: f64, n: usize) -> Result<f64> {
    let per_face = n * n * n;
    let node = |i: usize| -1.0 + (2 * i + 1) as f64 / n as f64;
    let values: Vec<f64> = (0..8 * per_face)
        .into_par_iter()
        .map(|idx| {
            let face = idx / per_face;
            let r = idx % per_face;
            let u = [node(r / (n * n)), node((r / n) % n), node(r % n)];
            let (pt, axis, side) = face_point(center, a, face, u);
            face_flux(geo, &pt, axis, side)
        })
        .collect::<Result<_>>()
        .map_err(surface_error)?;
    let cell = (2.0 * a / n as f64).powi(3);
    Ok(values.iter().sum::<f64>() * cell / TWO_PI_SQ)
}

fn check_common(m: &Model, center: &PhasePoint, size: f64) -> Result<()> {
    m.validate()?;
    if !(size > 0.0 && size.is_finite()) {
        return Err(Error::InvalidParameter("surface size must be positive".into()));
    }
    if !center.is_finite() {
        return Err(Error::NonFinite("surface centre"));
    }
    Ok(())
}

/// Charge enclosed by the hypercube of half-width `a` around `center`.
///
/// `n` is the number of midpoint nodes per face axis for quadrature, or the
/// sample count for Monte-Carlo.
pub fn dd_charge_cube(
    m: &Model,
    center: &PhasePoint,
    a: f64,
    n: usize,
    method: CubeMethod,
    seed: u64,
) -> Result<ChargeResult> {
    dd_charge_cube_with(m, center, a, n, method, seed, &ChargeOptions::default())
}

pub fn dd_charge_cube_with(
    m: &Model,
    center: &PhasePoint,
    a: f64,
    n: usize,
    method: CubeMethod,
    seed: u64,
    opts: &ChargeOptions,
) -> Result<ChargeResult> {
    check_common(m, center, a)?;
    let geo = geometry(m, opts, opts.steps);
    match method {
        CubeMethod::Quadrature => {
            if n < 4 {
                return Err(Error::InvalidParameter("quadrature needs at least 4 nodes per axis".into()));
            }
            let coarse_n = n / 2;
            let fine = cube_midpoint(&geo, center, a, n)?;
            let coarse = cube_midpoint(&geo, center, a, coarse_n)?;
            let ratio = (n as f64 / coarse_n as f64).powi(2);
            let q = fine + (fine - coarse) / (ratio - 1.0);
            let mut err = (fine - coarse).abs() / (ratio - 1.0);
            let mut evals = 8 * (n.pow(3) + coarse_n.pow(3)) as u64;
            if opts.fd_bias {
                let half = geometry(m, opts, opts.steps.halved());
                let coarse_half = cube_midpoint(&half, center, a, coarse_n)?;
                // steps error is O(h²): the halved pass removes 3/4 of it
                err += (coarse - coarse_half).abs() * 4.0 / 3.0;
                evals += 8 * coarse_n.pow(3) as u64;
            }
            err += ROUNDOFF_FLOOR;
            ChargeResult::new(q, err, ChargeMethod::CubeQuadrature, evals, a).accept()
        }
        CubeMethod::MonteCarlo => {
            if n < 2 {
                return Err(Error::InvalidParameter("Monte-Carlo needs at least 2 samples".into()));
            }
            let total_area = 8.0 * (2.0 * a).powi(3);
            let values: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut rng = sample_rng(seed, i as u64);
                    let face = rng.random_range(0..8usize);
                    let u = [
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                    ];
                    let (pt, axis, side) = face_point(center, a, face, u);
                    face_flux(&geo, &pt, axis, side).map(|f| f * total_area / TWO_PI_SQ)
                })
                .collect::<Result<_>>()
                .map_err(surface_error)?;
            let (mean, se) = mean_and_error(&values);
            ChargeResult::new(mean, se + ROUNDOFF_FLOOR, ChargeMethod::CubeMonteCarlo, n as u64, a).accept()
        }
    }
}

/// Charge enclosed by the 3-sphere of radius `r` around `center`, Monte-Carlo.
pub fn dd_charge_sphere(m: &Model, center: &PhasePoint, r: f64, samples: usize, seed: u64) -> Result<ChargeResult> {
    dd_charge_sphere_with(m, center, r, samples, seed, &ChargeOptions::default())
}

pub fn dd_charge_sphere_with(
    m: &Model,
    center: &PhasePoint,
    r: f64,
    samples: usize,
    seed: u64,
    opts: &ChargeOptions,
) -> Result<ChargeResult> {
    check_common(m, center, r)?;
    if samples < 2 {
        return Err(Error::InvalidParameter("Monte-Carlo needs at least 2 samples".into()));
    }
    let geo = geometry(m, opts, opts.steps);
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let n = sphere_direction(&mut rng);
            let pt = center.offset(&n.map(|c| c * r));
            let f = geo.flux(&pt)?;
            let dot: f64 = (0..4).map(|k| f[k] * n[k]).sum();
            // area 2π²r³ cancels the prefactor
            Ok(dot * r.powi(3))
        })
        .collect::<Result<_>>()
        .map_err(surface_error)?;
    let (mean, se) = mean_and_error(&values);
    ChargeResult::new(mean, se + ROUNDOFF_FLOOR, ChargeMethod::SphereMonteCarlo, samples as u64, r).accept()
}

/// Generator for sample `index`, independent of evaluation order.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform direction on the unit 3-sphere.
pub fn sphere_direction<R: Rng>(rng: &mut R) -> [f64; 4] {
    loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.map(|c| c / n);
        }
    }
}

fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{CanonicalChart, CircuitParams, TripleDotParams};
    use approx::assert_abs_diff_eq;

    const TAU: f64 = 2.0 * PI;

    fn phasor_residual(a: [f64; 3], t: (f64, f64)) -> f64 {
        let z = crate::algebra::C64::new(a[0], 0.0)
            + crate::algebra::C64::from_polar(a[1], t.0)
            + crate::algebra::C64::from_polar(a[2], t.1);
        z.norm()
    }

    #[test]
    fn phasor_equal_amplitudes() {
        let s = solve_phasor_zero(1.0, 1.0, 1.0);
        assert_eq!(s.len(), 2);
        assert_abs_diff_eq!(s[0].0, TAU / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[0].1, -TAU / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1].0, -TAU / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s[1].1, TAU / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn phasor_gapped_and_generic() {
        assert!(solve_phasor_zero(1.0, 1.6, 0.5).is_empty());
        let s = solve_phasor_zero(1.0, 1.3, 0.5);
        assert_eq!(s.len(), 2);
        for t in s {
            assert!(phasor_residual([1.0, 1.3, 0.5], t) < 1e-12);
        }
    }

    #[test]
    fn phasor_boundary_single_solution() {
        let s = solve_phasor_zero(2.0, 1.0, 1.0);
        assert_eq!(s.len(), 1);
        assert!(phasor_residual([2.0, 1.0, 1.0], s[0]) < 1e-7);
    }

    #[test]
    fn region_examples() {
        let mut p = CircuitParams::equal(1.0);
        p.ej_l = [1.0, 1.3, 0.5];
        let (l, r) = classify_region(&Model::Circuit(p));
        assert_eq!(l.tag, RegionTag::Topological);
        assert_abs_diff_eq!(l.margin, 0.2, epsilon = 1e-12);
        assert_eq!(r.tag, RegionTag::Topological);
        p.ej_l = [1.0, 1.6, 0.5];
        assert_eq!(classify_region(&Model::Circuit(p)).0.tag, RegionTag::Gapped);
        let t = TripleDotParams::symmetric(2.0, 1.0);
        let (l, r) = classify_region(&Model::TripleDot(t));
        assert_eq!(l.tag, RegionTag::Critical);
        assert_eq!(r.tag, RegionTag::Critical);
    }

    #[test]
    fn circuit_monopoles_equal_ej() {
        let m = Model::Circuit(CircuitParams::equal(1.0));
        let pts = locate_monopoles(&m).unwrap();
        assert_eq!(pts.len(), 4);
        for d in &pts {
            let (s1, s2) = (d.labels.0 as f64, d.labels.1 as f64);
            let want = [s1 * TAU / 3.0, -s1 * 2.0 * TAU / 3.0, s2 * TAU / 3.0, -s2 * 2.0 * TAU / 3.0];
            for k in 0..4 {
                assert_abs_diff_eq!(d.point.0[k], want[k], epsilon = 1e-12);
            }
            assert!(d.residual < 1e-9);
            assert_eq!(d.expected_charge, -(d.labels.0 as i32) * d.labels.1 as i32);
        }
        assert_eq!(pts.iter().map(|d| d.expected_charge).sum::<i32>(), 0);
    }

    #[test]
    fn tripledot_monopoles() {
        let m = Model::TripleDot(TripleDotParams::symmetric(1.0, 1.0));
        let pts = locate_monopoles(&m).unwrap();
        assert_eq!(pts.len(), 4);
        for d in &pts {
            let (s1, s2) = (d.labels.0 as f64, d.labels.1 as f64);
            let want = [s1 * PI / 3.0, -s1 * PI / 3.0, s2 * PI / 3.0, -s2 * PI / 3.0];
            for k in 0..4 {
                assert_abs_diff_eq!(d.point.0[k], want[k], epsilon = 1e-12);
            }
            assert!(d.residual < 1e-9);
        }
        let gapped = Model::TripleDot(TripleDotParams::symmetric(2.5, 1.0));
        assert!(locate_monopoles(&gapped).unwrap().is_empty());
    }

    #[test]
    fn locator_rejects_non_chiral() {
        let mut p = CircuitParams::equal(1.0);
        p.ng_l = 0.3;
        assert!(matches!(locate_monopoles(&Model::Circuit(p)), Err(Error::NotChiralRegime(_))));
    }

    #[test]
    fn monopoles_are_triple_degeneracies() {
        let mut p = CircuitParams::equal(1.0);
        p.ej_l = [1.0, 1.3, 0.5];
        let m = Model::Circuit(p);
        for d in locate_monopoles(&m).unwrap() {
            let es = crate::algebra::eigh3(&m.hamiltonian(&d.point)).unwrap();
            assert!(es.spread() < 1e-8 * m.coupling_scale());
        }
    }

    #[test]
    fn canonical_charge_small_grid() {
        let m = Model::Canonical(CanonicalChart::identity());
        let r = dd_charge_cube(&m, &PhasePoint::default(), 0.5, 8, CubeMethod::Quadrature, 0).unwrap();
        assert_eq!(r.q_rounded, 1);
        assert!((r.q_value - 1.0).abs() < 0.02, "{r:?}");
    }

    #[test]
    fn gapped_cube_is_zero() {
        let m = Model::Canonical(CanonicalChart::identity());
        let c = PhasePoint::new(1.5, 0.0, 0.0, 0.0);
        let r = dd_charge_cube(&m, &c, 0.5, 6, CubeMethod::Quadrature, 0).unwrap();
        assert_eq!(r.q_rounded, 0);
        assert!(r.q_value.abs() < 1e-3);
    }

    #[test]
    fn degeneracy_on_surface_is_reported() {
        let m = Model::Canonical(CanonicalChart::identity());
        // the origin sits on the face x = +a
        let c = PhasePoint::new(-0.5, 0.0, 0.0, 0.0);
        let r = dd_charge_cube(&m, &c, 0.5, 5, CubeMethod::Quadrature, 0);
        assert!(r.is_err());
    }

    #[test]
    fn rng_streams_are_order_independent() {
        let a: f64 = sample_rng(7, 3).random();
        let _: f64 = sample_rng(7, 2).random();
        let b: f64 = sample_rng(7, 3).random();
        assert_eq!(a, b);
        let c: f64 = sample_rng(7, 4).random();
        assert_ne!(a, c);
    }
}
