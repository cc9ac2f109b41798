use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent input (dimensions, shapes, non-finite entries).
    #[error("invalid input: {0}")]
    Input(String),

    /// A map failed complete positivity or trace preservation.
    #[error("not CPTP: {reason} (residual {residual:.3e})")]
    Cptp { reason: String, residual: f64 },

    /// A numerical rank decision changed under a tolerance perturbation.
    #[error("ill-conditioned nullspace: rank {at_tol} at tol, {at_loose} at 10x tol, {at_tight} at tol/10")]
    Conditioning {
        at_tol: usize,
        at_loose: usize,
        at_tight: usize,
    },

    /// An iterative solver stopped before reaching its tolerance.
    #[error("{solver} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    /// A proven inequality was observed to fail; carries the offending sample.
    #[error("inequality violated: {0}")]
    LemmaViolation(String),

    /// The generator has no spectral gap, so the semigroup never returns.
    #[error("generator is gapless (second eigenvalue real part {0:.3e}); no finite return time")]
    NoReturnTime(f64),

    /// A finite group closure exceeded the allowed order.
    #[error("group closure exceeded max order {0}")]
    GroupTooLarge(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
