//! Conditional engineering of nonclassical cavity-field states.
//!
//! Ground-state two-level atoms cross a resonant cavity prepared in a
//! coherent state; conditioning on every atom also leaving in the ground
//! state reshapes the field into a nonclassical state. This crate computes
//! the conditioned state, its success probability, quadrature squeezing,
//! Mandel Q parameter and Wigner function, each closed form paired with an
//! independent brute-force route:
//!
//! * branch maps ([`jc`]) against a matrix-exponential joint evolution,
//! * the closed-form conditioned state ([`postselect`]) against the
//!   iterative cosine sandwich,
//! * closed-form quadrature moments ([`metrics`]) against matrix traces,
//! * the Laguerre-series Wigner function ([`wigner`]) against a
//!   displaced-parity evaluation.
//!
//! All types are immutable after construction and all operations are pure
//! functions, so evaluation parallelizes freely; grid sweeps use rayon
//! internally with deterministic assembly.

pub mod error;
pub mod fock;
pub mod jc;
mod math;
pub mod metrics;
pub mod postselect;
pub mod wigner;

pub use error::{Error, Result};
pub use fock::{
    choose_cutoff, coherent_state, default_cutoff, validate_state, FieldState, FieldStateJson,
    LadderKind, LadderMatrix, ProtocolParams, StateDiagnostics,
};
pub use jc::{
    closed_form_blocks, cosine_coupling_diag, excited_branch, ground_branch,
    joint_evolution_oracle, JointBlocks,
};
pub use metrics::{
    beta_fn, mandel_q, photon_statistics, quadrature_moments_closed_form,
    quadrature_moments_trace, uncertainty_product, PhotonStats, QuadratureStats,
};
pub use postselect::{
    iterate_ps, iterate_ps_schedule, ps_coefficient, ps_state, success_probability,
    success_probability_curve, PsOutcome,
};
pub use wigner::{
    negativity_metrics, wigner_grid, wigner_parity_oracle, wigner_point, DisplacedParity,
    GridSpec, LaguerreTable, NegativityMetrics, WignerGrid, WignerSummary,
};
