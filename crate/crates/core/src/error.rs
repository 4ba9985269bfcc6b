use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} = {value} is outside {range}")]
    Parameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("mask has {got} entries, tree has {expected} vertices")]
    MaskSize { expected: usize, got: usize },
    #[error("the root must be kept")]
    RootNotKept,
    #[error("cannot keep {requested} of {available} non-root vertices")]
    SubsetTooLarge { requested: usize, available: usize },
    #[error("depth {r} exceeds horizon {horizon}")]
    DepthOrder { r: usize, horizon: usize },
    #[error("point does not belong to this tree")]
    ForeignPoint,
    #[error("point location is outside the tree: {0}")]
    BadPoint(String),
    #[error("total mass {0} must be 1 within 1e-9")]
    NotProbability(f64),
    #[error("total mass is zero")]
    ZeroMass,
    #[error("rejection sampler gave up after {attempts} attempts")]
    RejectionCap { attempts: u64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("tail mass {tail:e} beyond index {k_eff} exceeds {limit:e}")]
    TailMass { tail: f64, k_eff: usize, limit: f64 },
    #[error("kernel row {row} underflows to zero")]
    Underflow { row: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("empty sample")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter { name, value, range: "(0, 1)" })
    }
}

pub(crate) fn check_half_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter { name, value, range: "(0, 1]" })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter { name, value, range: "(0, inf)" })
    }
}
