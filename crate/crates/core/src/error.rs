use thiserror::Error;

use crate::topology::ChargeResult;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (relative violation {violation:.3e})")]
    NonHermitianInput { violation: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("charge cutoff must be at least 1, got {0}")]
    CutoffTooSmall(usize),

    #[error("couplings outside the topological window 0 < v < 2Γ (v = {v}, Γ = {gamma})")]
    OutsideTopologicalRegion { v: f64, gamma: f64 },

    #[error("Hamiltonian is not chiral: |middle component| = {middle:.9} (expected 1/√2)")]
    NotChiral { middle: f64 },

    #[error("ground state is degenerate (gap {gap:.3e} below {threshold:.3e})")]
    DegenerateGroundState { gap: f64, threshold: f64 },

    #[error("stencil point too close to a degeneracy (gap {gap:.3e} below {threshold:.3e})")]
    DegeneracyTooClose { gap: f64, threshold: f64 },

    #[error("phase of v2 jumps by {jump:.3} rad across one stencil leg; reduce the inner step")]
    BranchJump { jump: f64 },

    #[error("curvature has imaginary residue {residue:.3e} above bound {bound:.3e}")]
    ImaginaryResidue { residue: f64, bound: f64 },

    #[error("analytic curvature is singular at q = 0")]
    SingularPoint,

    #[error("model is not in the chiral three-level regime: {0}")]
    NotChiralRegime(String),

    #[error("integration surface passes within the degeneracy threshold (gap {gap:.3e})")]
    DegeneracyOnSurface { gap: f64 },

    #[error("charge {value:.6} is not within 3σ (σ = {error:.3e}) of an integer", value = .0.q_value, error = .0.error_estimate)]
    NotConverged(Box<ChargeResult>),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
