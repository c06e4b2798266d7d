//! Error taxonomy shared across the crate.
//!
//! Variants split into two families: input problems (bad configuration,
//! out-of-domain arguments, broken call contracts) and outcome problems
//! (infeasible calibrations, degenerate systems, failed verifications).
//! The CLI maps the first family to exit code 2 and the second to exit
//! code 1.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates a type invariant.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An argument is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A call-site contract was broken (wrong shape, unsorted input, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A calibration target cannot be reached for any parameter value.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A linear system or inversion is singular / unidentifiable.
    #[error("degenerate: {0}")]
    Degenerate(String),

    /// An equilibrium candidate failed best-response verification; the
    /// message carries the worst regret witness.
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl Error {
    /// True for errors caused by caller input rather than by the
    /// mathematics of the problem instance.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_) | Error::Domain(_) | Error::Contract(_)
        )
    }

    /// Stable machine-readable tag for reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidConfig(_) => "invalid_config",
            Error::Domain(_) => "domain",
            Error::Contract(_) => "contract",
            Error::Infeasible(_) => "infeasible",
            Error::Degenerate(_) => "degenerate",
            Error::VerificationFailed(_) => "verification_failed",
        }
    }
}
