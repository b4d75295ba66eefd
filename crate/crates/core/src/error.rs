use thiserror::Error;

/// Which end of an integration interval a problem was localized to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Lower,
    Upper,
}

impl std::fmt::Display for Endpoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Endpoint::Lower => f.write_str("lower endpoint"),
            Endpoint::Upper => f.write_str("upper endpoint"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A hypothesis on the input parameters does not hold.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error(
        "quadrature did not converge near the {endpoint} after {evaluations} evaluations \
         (best estimate {value:e}, error estimate {err_estimate:e})"
    )]
    QuadratureBudget {
        value: f64,
        err_estimate: f64,
        evaluations: usize,
        endpoint: Endpoint,
    },

    #[error("integrand is not finite at x = {x:e}")]
    NonFinite { x: f64 },

    #[error("optimizer inconsistency: {0}")]
    Optimizer(String),

    #[error("no eigenvalue bracket below lambda = {lambda_max:e}; raise lambda_max")]
    NoBracket { lambda_max: f64 },

    #[error("ODE step size underflow at r = {r:e}")]
    StepUnderflow { r: f64 },

    #[error("finite differences need the stencil inside the tabulated range: {0}")]
    Stencil(String),
}

impl Error {
    /// True when the error reports bad input rather than a numeric failure.
    pub fn is_invalid_input(&self) -> bool {
        matches!(self, Error::InvalidParams(_) | Error::Domain(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
