use crate::cavity::{BranchId, StabilityClass};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid cavity parameter `{name}` = {value}: must be finite and strictly positive")]
    InvalidParams { name: &'static str, value: f64 },

    #[error("steady-state solver could not certify the root set at alpha_d={alpha_d}, beta_d={beta_d}: {reason}")]
    NonConvergence {
        alpha_d: f64,
        beta_d: f64,
        reason: &'static str,
    },

    #[error("system matrix is singular at omega={omega} on branch {branch} (condition estimate {condition:e})")]
    SingularSystem {
        omega: f64,
        branch: BranchId,
        condition: f64,
    },

    #[error("branch {branch} is {stability}; the linearised spectrum is only defined on stable branches")]
    UnstableBranch {
        branch: BranchId,
        stability: StabilityClass,
    },

    #[error("conditioning variance {variance:e} is not positive")]
    DegenerateConditioner { variance: f64 },

    #[error("EPR optimiser stalled: best {best:e} reproduced by only {agreeing} of {starts} starts")]
    OptimizerStall {
        best: f64,
        agreeing: usize,
        starts: usize,
    },

    #[error("invalid sweep: {0}")]
    InvalidSweep(&'static str),
}

/// Stable machine-readable error codes, as written to sweep output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    InvalidParams,
    NonConvergence,
    SingularSystem,
    UnstableBranch,
    NoStableBranch,
    DegenerateConditioner,
    OptimizerStall,
    InvalidSweep,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::InvalidParams => "invalid_params",
            ErrorCode::NonConvergence => "non_convergence",
            ErrorCode::SingularSystem => "singular_system",
            ErrorCode::UnstableBranch => "unstable_branch",
            ErrorCode::NoStableBranch => "no_stable_branch",
            ErrorCode::DegenerateConditioner => "degenerate_conditioner",
            ErrorCode::OptimizerStall => "optimizer_stall",
            ErrorCode::InvalidSweep => "invalid_sweep",
        }
    }

    /// Whether the code records a numerical failure, as opposed to a
    /// physically meaningful "no measurement here" outcome.
    pub fn is_failure(self) -> bool {
        !matches!(self, ErrorCode::UnstableBranch | ErrorCode::NoStableBranch)
    }
}

impl core::fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Error {
    pub fn code(&self) -> ErrorCode {
        match self {
            Error::InvalidParams { .. } => ErrorCode::InvalidParams,
            Error::NonConvergence { .. } => ErrorCode::NonConvergence,
            Error::SingularSystem { .. } => ErrorCode::SingularSystem,
            Error::UnstableBranch { .. } => ErrorCode::UnstableBranch,
            Error::DegenerateConditioner { .. } => ErrorCode::DegenerateConditioner,
            Error::OptimizerStall { .. } => ErrorCode::OptimizerStall,
            Error::InvalidSweep(_) => ErrorCode::InvalidSweep,
        }
    }
}
