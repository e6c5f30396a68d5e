//! Tensor Berry connections, curvatures and tensor-monopole charges of
//! chiral three-level Hamiltonians on a four-dimensional phase torus.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod models;
pub mod topology;

pub use algebra::{eigh3, gellmann_compose, gellmann_decompose, EigenSystem3, Hermitian3, QVector, C64};
pub use error::{Error, Result};
pub use geometry::{
    analytic_curvature_canonical, ground_state_gauge_fixed, qgt, tensor_connection, tensor_curvature, Geometry,
    GaugeFixedState, Steps,
};
pub use models::{Axis, CanonicalChart, CircuitParams, Model, PhasePoint, SignConvention, TripleDotParams};
pub use topology::{
    classify_region, dd_charge_cube, dd_charge_sphere, locate_monopoles, solve_phasor_zero, ChargeMethod,
    ChargeResult, CubeMethod, DegeneratePoint, RegionClass, RegionTag,
};
