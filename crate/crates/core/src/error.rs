use thiserror::Error;

/// Errors produced by the state-construction and measurement routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The Fock cutoff leaves too much photon-number mass above it.
    #[error(
        "cutoff {cutoff} leaves a photon-number tail mass of {tail_mass:.3e} \
         (limit {limit:.1e}); increase the cutoff"
    )]
    Truncation {
        cutoff: usize,
        tail_mass: f64,
        limit: f64,
    },

    /// A parameter failed validation; `field` names the offending input.
    #[error("invalid {field}: {message}")]
    InvalidParams { field: &'static str, message: String },

    /// A conditioning step produced a trace too small to renormalize.
    #[error("conditioned state trace {trace:.3e} is numerically degenerate")]
    DegenerateTrace { trace: f64 },

    /// Mandel Q requires a nonzero mean photon number.
    #[error("Mandel Q is undefined for a field with zero mean photon number (alpha = 0)")]
    UndefinedMandelQ,

    /// The operation requires a unit-trace input state.
    #[error("operation requires a normalized state, got trace {trace:.6e}")]
    NotNormalized { trace: f64 },

    /// A numerical routine failed to converge or produced non-finite values.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Malformed serialized state data.
    #[error("state format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
