//! C ABI over `tensor_monopole`.
//!
//! Models live behind the opaque `TmModel` handle. Every fallible call
//! returns a `TmStatus`; on failure the message is kept per thread and can be
//! copied out with `tm_last_error_message`. Panics never cross the boundary.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tensor_monopole::geometry::{Geometry, Steps};
use tensor_monopole::models::{Axis, CanonicalChart, CircuitParams, Model, PhasePoint, SignConvention, TripleDotParams};
use tensor_monopole::topology::{self, ChargeMethod, ChargeResult, CubeMethod};
use tensor_monopole::{Error, Hermitian3, C64};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    NonHermitian = 3,
    NotChiral = 4,
    Degenerate = 5,
    BranchJump = 6,
    ImaginaryResidue = 7,
    DegeneracyOnSurface = 8,
    NotConverged = 9,
    BufferTooSmall = 10,
    Numerical = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmAxis {
    X = 0,
    Y = 1,
    Z = 2,
    W = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmCubeMethod {
    Quadrature = 0,
    MonteCarlo = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TmConvention {
    Corrected = 0,
    MainText = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TmComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for TmComplex {
    fn from(c: C64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

/// `method`: 0 cube quadrature, 1 cube Monte-Carlo, 2 sphere Monte-Carlo.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TmChargeResult {
    pub q_value: f64,
    pub q_rounded: i64,
    pub error_estimate: f64,
    pub method: i32,
    pub evaluations: u64,
    pub surface_parameter: f64,
}

impl From<&ChargeResult> for TmChargeResult {
    fn from(r: &ChargeResult) -> Self {
        Self {
            q_value: r.q_value,
            q_rounded: r.q_rounded,
            error_estimate: r.error_estimate,
            method: match r.method {
                ChargeMethod::CubeQuadrature => 0,
                ChargeMethod::CubeMonteCarlo => 1,
                ChargeMethod::SphereMonteCarlo => 2,
            },
            evaluations: r.evaluations,
            surface_parameter: r.surface_parameter,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TmDegeneratePoint {
    pub point: [f64; 4],
    pub s1: i8,
    pub s2: i8,
    pub residual: f64,
    pub expected_charge: i32,
}

/// Opaque model handle.
pub struct TmModel {
    inner: Model,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> TmStatus {
    match e {
        Error::NonHermitianInput { .. } => TmStatus::NonHermitian,
        Error::NotChiral { .. } | Error::NotChiralRegime(_) => TmStatus::NotChiral,
        Error::DegenerateGroundState { .. } | Error::DegeneracyTooClose { .. } | Error::SingularPoint => {
            TmStatus::Degenerate
        }
        Error::BranchJump { .. } => TmStatus::BranchJump,
        Error::ImaginaryResidue { .. } => TmStatus::ImaginaryResidue,
        Error::DegeneracyOnSurface { .. } => TmStatus::DegeneracyOnSurface,
        Error::NotConverged(_) => TmStatus::NotConverged,
        Error::InvalidParameter(_) | Error::CutoffTooSmall(_) | Error::OutsideTopologicalRegion { .. } => {
            TmStatus::InvalidParameter
        }
        Error::NonFinite(_) => TmStatus::Numerical,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (TmStatus, String)>) -> TmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TmStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            TmStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (TmStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (TmStatus, String) {
    (TmStatus::NullPointer, "null pointer argument".into())
}

unsafe fn read<const N: usize>(p: *const f64) -> Result<[f64; N], (TmStatus, String)> {
    if p.is_null() {
        return Err(null());
    }
    Ok(std::array::from_fn(|i| *p.add(i)))
}

unsafe fn model<'a>(m: *const TmModel) -> Result<&'a Model, (TmStatus, String)> {
    m.as_ref().map(|h| &h.inner).ok_or_else(null)
}

unsafe fn store_model(m: Model, out: *mut *mut TmModel) -> Result<(), (TmStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    m.validate().map_err(lib_err)?;
    *out = Box::into_raw(Box::new(TmModel { inner: m }));
    Ok(())
}

fn axis(a: TmAxis) -> Axis {
    Axis::from_index(a as usize)
}

/// Canonical model `q = scale·(φ - origin)`.
#[no_mangle]
pub unsafe extern "C" fn tm_model_new_canonical(origin: *const f64, scale: f64, out: *mut *mut TmModel) -> TmStatus {
    guard(|| {
        let origin = PhasePoint(read::<4>(origin)?);
        store_model(Model::Canonical(CanonicalChart::scaled(origin, scale)), out)
    })
}

/// Three-island circuit; `ejl`, `ejr` point to three values each.
#[no_mangle]
pub unsafe extern "C" fn tm_model_new_circuit(
    ejl: *const f64,
    ejr: *const f64,
    e_c: f64,
    ng_l: f64,
    ng_r: f64,
    out: *mut *mut TmModel,
) -> TmStatus {
    guard(|| {
        let p = CircuitParams {
            ej_l: read::<3>(ejl)?,
            ej_r: read::<3>(ejr)?,
            e_c,
            ng_l,
            ng_r,
        };
        store_model(Model::Circuit(p), out)
    })
}

/// Triple-dot chain; `gamma` points to four values, `eps` to three.
#[no_mangle]
pub unsafe extern "C" fn tm_model_new_tripledot(
    v_l: f64,
    v_r: f64,
    gamma: *const f64,
    eps: *const f64,
    convention: TmConvention,
    out: *mut *mut TmModel,
) -> TmStatus {
    guard(|| {
        let p = TripleDotParams {
            v_l,
            v_r,
            gamma: read::<4>(gamma)?,
            eps: read::<3>(eps)?,
            convention: match convention {
                TmConvention::Corrected => SignConvention::Corrected,
                TmConvention::MainText => SignConvention::MainText,
            },
        };
        store_model(Model::TripleDot(p), out)
    })
}

/// Releases a handle; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn tm_model_free(m: *mut TmModel) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Writes the 3×3 Hamiltonian at `pt` row-major into `out[9]`.
#[no_mangle]
pub unsafe extern "C" fn tm_model_hamiltonian(m: *const TmModel, pt: *const f64, out: *mut TmComplex) -> TmStatus {
    guard(|| {
        let m = model(m)?;
        let pt = PhasePoint(read::<4>(pt)?);
        if out.is_null() {
            return Err(null());
        }
        let h = m.hamiltonian(&pt);
        for i in 0..3 {
            for j in 0..3 {
                *out.add(3 * i + j) = h[(i, j)].into();
            }
        }
        Ok(())
    })
}

/// Ascending eigenvalues and eigenvectors of a row-major Hermitian `h[9]`.
/// `vectors[3k..3k+3]` is the eigenvector of `values[k]`.
#[no_mangle]
pub unsafe extern "C" fn tm_eigh3(h: *const TmComplex, values: *mut f64, vectors: *mut TmComplex) -> TmStatus {
    guard(|| {
        if h.is_null() || values.is_null() || vectors.is_null() {
            return Err(null());
        }
        let mut entries = [[C64::new(0.0, 0.0); 3]; 3];
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                let c = *h.add(3 * i + j);
                *e = C64::new(c.re, c.im);
            }
        }
        let es = tensor_monopole::eigh3(&Hermitian3::try_new(entries).map_err(lib_err)?).map_err(lib_err)?;
        for k in 0..3 {
            *values.add(k) = es.values[k];
            for i in 0..3 {
                *vectors.add(3 * k + i) = es.vectors[k][i].into();
            }
        }
        Ok(())
    })
}

/// Curvature component `H_{a b c}` at `pt`.
#[no_mangle]
pub unsafe extern "C" fn tm_tensor_curvature(
    m: *const TmModel,
    pt: *const f64,
    a: TmAxis,
    b: TmAxis,
    c: TmAxis,
    h_outer: f64,
    h_inner: f64,
    out: *mut f64,
) -> TmStatus {
    guard(|| {
        let m = model(m)?;
        let pt = PhasePoint(read::<4>(pt)?);
        if out.is_null() {
            return Err(null());
        }
        if !(h_outer > 0.0 && h_inner > 0.0) {
            return Err((TmStatus::InvalidParameter, "finite-difference steps must be positive".into()));
        }
        let geo = Geometry::new(m).with_steps(Steps {
            outer: h_outer,
            inner: h_inner,
        });
        *out = geo.curvature(&pt, axis(a), axis(b), axis(c)).map_err(lib_err)?;
        Ok(())
    })
}

/// Writes up to `capacity` degenerate points and their total into `*count`.
/// Returns `BufferTooSmall` when more points exist than fit; pass a null
/// `out` with zero capacity to query the count.
#[no_mangle]
pub unsafe extern "C" fn tm_locate_monopoles(
    m: *const TmModel,
    out: *mut TmDegeneratePoint,
    capacity: usize,
    count: *mut usize,
) -> TmStatus {
    guard(|| {
        let m = model(m)?;
        if count.is_null() || (out.is_null() && capacity > 0) {
            return Err(null());
        }
        let pts = topology::locate_monopoles(m).map_err(lib_err)?;
        *count = pts.len();
        for (k, d) in pts.iter().take(capacity).enumerate() {
            *out.add(k) = TmDegeneratePoint {
                point: d.point.0,
                s1: d.labels.0,
                s2: d.labels.1,
                residual: d.residual,
                expected_charge: d.expected_charge,
            };
        }
        if pts.len() > capacity {
            return Err((
                TmStatus::BufferTooSmall,
                format!("{} points, capacity {capacity}", pts.len()),
            ));
        }
        Ok(())
    })
}

unsafe fn charge_out(
    r: tensor_monopole::Result<ChargeResult>,
    out: *mut TmChargeResult,
) -> Result<(), (TmStatus, String)> {
    match r {
        Ok(r) => {
            *out = (&r).into();
            Ok(())
        }
        Err(Error::NotConverged(r)) => {
            // the unaccepted estimate is still reported
            *out = (&*r).into();
            Err(lib_err(Error::NotConverged(r)))
        }
        Err(e) => Err(lib_err(e)),
    }
}

/// Charge inside the hypercube of half-width `a` around `center`.
#[no_mangle]
pub unsafe extern "C" fn tm_dd_charge_cube(
    m: *const TmModel,
    center: *const f64,
    a: f64,
    n: usize,
    method: TmCubeMethod,
    seed: u64,
    out: *mut TmChargeResult,
) -> TmStatus {
    guard(|| {
        let m = model(m)?;
        let c = PhasePoint(read::<4>(center)?);
        if out.is_null() {
            return Err(null());
        }
        let method = match method {
            TmCubeMethod::Quadrature => CubeMethod::Quadrature,
            TmCubeMethod::MonteCarlo => CubeMethod::MonteCarlo,
        };
        charge_out(topology::dd_charge_cube(m, &c, a, n, method, seed), out)
    })
}

/// Charge inside the 3-sphere of radius `r` around `center`, Monte-Carlo.
#[no_mangle]
pub unsafe extern "C" fn tm_dd_charge_sphere(
    m: *const TmModel,
    center: *const f64,
    r: f64,
    samples: usize,
    seed: u64,
    out: *mut TmChargeResult,
) -> TmStatus {
    guard(|| {
        let m = model(m)?;
        let c = PhasePoint(read::<4>(center)?);
        if out.is_null() {
            return Err(null());
        }
        charge_out(topology::dd_charge_sphere(m, &c, r, samples, seed), out)
    })
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`) and returns its full length in bytes.
#[no_mangle]
pub unsafe extern "C" fn tm_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map(|c| c.as_bytes()).unwrap_or(b"");
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
