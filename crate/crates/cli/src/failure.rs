use std::fmt;

use chancomp_core::Error;

/// Why a run stopped, mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad inputs or flags that parsed but do not make sense (exit 2).
    Validation(String),
    /// A solver stopped short or a rank decision was unstable (exit 3).
    Numerical(String),
    /// A checked inequality failed (exit 1).
    Violation(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Violation(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "validation error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Violation(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::NonConvergence { .. } | Error::Conditioning { .. } => Failure::Numerical(msg),
            Error::LemmaViolation(_) => Failure::Violation(msg),
            _ => Failure::Validation(msg),
        }
    }
}
