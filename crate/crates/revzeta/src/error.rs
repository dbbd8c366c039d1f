use thiserror::Error;

/// Errors surfaced by the numerical pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("profile is not strictly positive: f({x}) = {value}")]
    PositivityViolation { x: f64, value: f64 },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("adaptive quadrature hit the subdivision limit ({limit}); error estimate {err_estimate:e}")]
    SubdivisionLimit { limit: usize, err_estimate: f64 },

    #[error("quadrature failure in {context}: {source}")]
    QuadratureFailure {
        context: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("integrand does not decay on the improper tail: |f({u})| = {value:e}")]
    NonDecayDetected { u: f64, value: f64 },

    #[error("series tail bound {bound:e} still above target {target:e} at k = {k_cap}")]
    TailBoundUnmet { k_cap: usize, bound: f64, target: f64 },

    #[error("ODE step size underflow near x = {x}")]
    StiffnessFailure { x: f64 },

    #[error("ODE solver exceeded {max_steps} steps before reaching x = {x_end}")]
    ToleranceUnmet { max_steps: usize, x_end: f64 },

    #[error("numerical differentiation failed: {0}")]
    DifferentiationFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wrap a quadrature error with the name of the quantity being integrated.
    pub fn in_context(self, context: &'static str) -> Error {
        Error::QuadratureFailure {
            context,
            source: Box::new(self),
        }
    }
}
