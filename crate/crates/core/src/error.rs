use alloc::string::String;

/// Errors produced by the model, solvers and experiment drivers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Parameters violate a model invariant (rates, geometry, occupation).
    #[error("invalid parameters: {0}")]
    Validation(String),

    /// A requested Bragg angle does not exist (|cos θ| > 1).
    #[error("angle out of range: cos θ = {cos_theta}")]
    AngleOutOfRange { cos_theta: f64 },

    /// Linear system too ill-conditioned to trust the solve.
    #[error("ill-conditioned system: 1-norm condition estimate {condition:.3e} (N = {dim})")]
    IllConditioned { condition: f64, dim: usize },

    /// The steady state of the Liouvillian is not unique.
    #[error("ambiguous steady state: {0}")]
    AmbiguousSteadyState(String),

    /// A solver tier cannot handle the requested size.
    #[error("capability exceeded: {0}")]
    Capability(String),

    /// Scan or tier settings that do not fit together.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::IllConditioned { .. } | Error::AmbiguousSteadyState(_) | Error::Capability(_))
    }
}

pub type Result<T> = core::result::Result<T, Error>;
