use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("leg angle {0} rad is outside [0, pi/2]")]
    AngleOutOfRange(f64),

    #[error("non-representable linkage configuration at theta = {theta} rad (4b^2 - h^2 = {radicand:e}, h = {height:e})")]
    NonRepresentable {
        theta: f64,
        radicand: f64,
        height: f64,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("rank-deficient least-squares design: {0}")]
    RankDeficient(String),

    #[error("all samples are slack (lambda <= 1); nothing to fit")]
    AllSlack,

    #[error("plane normals are parallel; no unique intersection line")]
    ParallelPlanes,

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("malformed input: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite, got {value}")))
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be > 0, got {value}")))
    }
}

pub(crate) fn ensure_non_negative(name: &'static str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be >= 0, got {value}")))
    }
}
