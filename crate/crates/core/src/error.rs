use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{what} is outside its valid range: {detail}")]
    Range { what: &'static str, detail: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("positivity violated: minimum value {min:e} is not above {floor:e}")]
    Positivity { min: f64, floor: f64 },

    #[error("function is under-resolved: top modes carry {tail:e} of its norm (limit {limit:e})")]
    Resolution { tail: f64, limit: f64 },

    #[error("grid functions live on different quadratures")]
    MismatchedQuadrature,

    #[error("quotient undefined: {0}")]
    DivisionByZero(String),

    #[error("singular exponent: {0}")]
    SingularExponent(String),

    #[error("{0} did not converge")]
    Convergence(String),

    #[error("conservation drift {drift:e} exceeds tolerance {tol:e}")]
    ConservationDrift { drift: f64, tol: f64 },

    #[error("step failed at t = {t}: {source}")]
    StepFailed {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Range { .. } => 2,
            Error::StepFailed { source, .. } => source.exit_code(),
            _ => 3,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
