use alloc::boxed::Box;
use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Where inside a run an error surfaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepLocation {
    /// 1-based global step.
    pub step: usize,
    /// 1-based outer iteration (VRADAM) or the step itself (single-loop methods).
    pub outer: usize,
    /// 1-based inner step; 0 for single-loop methods.
    pub inner: usize,
}

impl fmt::Display for StepLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inner == 0 {
            write!(f, "step {}", self.step)
        } else {
            write!(f, "step {} (t={}, k={})", self.step, self.outer, self.inner)
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("root not bracketed: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    Bracket { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
    #[error("construction infeasible: {0}")]
    Construction(String),
    #[error("enumeration of {count} batches exceeds the cap of {cap}")]
    EnumerationTooLarge { count: u128, cap: u128 },
    #[error("{bound} violated: observed {observed}, limit {limit}")]
    BoundViolation { bound: &'static str, observed: f64, limit: f64 },
    #[error("{location}: {source}")]
    AtStep { location: StepLocation, source: Box<Error> },
}

impl Error {
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn at(self, location: StepLocation) -> Self {
        Error::AtStep { location, source: Box::new(self) }
    }

    /// The innermost error, with step locations stripped.
    pub fn root_cause(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root_cause(),
            other => other,
        }
    }

    /// Location of the failing step, if the error came out of a run.
    pub fn location(&self) -> Option<StepLocation> {
        match self {
            Error::AtStep { location, .. } => Some(*location),
            _ => None,
        }
    }
}
