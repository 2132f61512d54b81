use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// Variants split into input/parameter problems and hypothesis violations;
/// the CLI maps the latter to a distinct exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {value} out of range [0, {max}]")]
    IndexOutOfRange { value: u64, max: u64 },

    #[error("level {level} exceeds grid exponent {q}")]
    LevelTooFine { level: u32, q: u32 },

    #[error("grid exponent mismatch: {0} vs {1}")]
    ExponentMismatch(u32, u32),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("empty set: {0}")]
    Empty(&'static str),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("pigeonhole failed: {0}")]
    Pigeonhole(String),
}

impl Error {
    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// True for errors that signal a violated mathematical hypothesis rather
    /// than malformed input.
    pub fn is_hypothesis(&self) -> bool {
        matches!(self, Error::Hypothesis(_) | Error::Pigeonhole(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
