use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("expression parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("growth function has a pole at s = {s} (g(s) vanishes)")]
    Pole { s: f64 },

    #[error("{what} = {value} is outside the admissible domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sign structure of g not found: {0}")]
    StructureNotFound(String),

    #[error("g has more than two positive zeros (found sign changes at {0:?})")]
    TooManyZeros(Vec<f64>),

    #[error("step size underflow at r = {r}")]
    StepUnderflow { r: f64 },

    #[error("non-finite state encountered at r = {r}")]
    NonFinite { r: f64 },

    #[error("no zero-crossing initial height found below {limit} after {attempts} attempts")]
    NoCrossing { limit: f64, attempts: usize },

    #[error("classification undetermined at d = {d} even with r_max = {r_max}")]
    Undetermined { d: f64, r_max: f64 },

    #[error("trajectory tail too short for a decay fit: {0}")]
    TailTooShort(String),

    #[error("mesh too coarse: spacing {h} exceeds {limit}")]
    Resolution { h: f64, limit: f64 },

    #[error("dual table range exceeded: s = {s} > s_max = {s_max}")]
    RangeExceeded { s: f64, s_max: f64 },

    #[error("numerical result contradicts the structure theory: {0}")]
    TheoryViolation(String),
}

impl Error {
    /// True for failures of the numerics (stalls, underflow, non-finite state)
    /// as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::StepUnderflow { .. }
                | Error::NonFinite { .. }
                | Error::NoCrossing { .. }
                | Error::Undetermined { .. }
                | Error::TailTooShort(_)
                | Error::RangeExceeded { .. }
                | Error::TheoryViolation(_)
        )
    }
}
