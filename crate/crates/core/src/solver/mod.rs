//! Backends that turn a [`MaxSatProblem`] into a model: an external
//! MaxSAT process, an internal exact search, and an exhaustive oracle that
//! bypasses the encoding entirely.

mod external;
mod internal;
mod oracle;

use std::fmt;
use std::time::Duration;

pub use external::{parse_solver_output, solve_external, SolverOutput};
pub use internal::solve_internal;
pub use oracle::{min_elimination_width, solve_oracle, ORACLE_LIMIT};

use crate::encoding::{MaxSatModel, MaxSatProblem};
use crate::subinstance::Subinstance;

pub const DEFAULT_SOLVER_TIMEOUT: Duration = Duration::from_secs(2);

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolverMode {
    /// Branch and bound over parent-set choices with a SAT oracle.
    Internal,
    /// Command template; `{wcnf}` is replaced by the instance path.
    External(String),
    /// Exhaustive enumeration, for small instances only.
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub mode: SolverMode,
    pub timeout: Duration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: SolverMode::Internal,
            timeout: DEFAULT_SOLVER_TIMEOUT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimum,
    /// Best model found before the deadline.
    Satisfiable,
    Unknown,
    Error,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimum => "OPTIMUM",
            SolveStatus::Satisfiable => "SATISFIABLE",
            SolveStatus::Unknown => "UNKNOWN",
            SolveStatus::Error => "ERROR",
        })
    }
}

/// A model is present exactly when the status is `Optimum` or
/// `Satisfiable`.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub model: Option<MaxSatModel>,
    pub wall_time: Duration,
    pub message: String,
}

impl SolveOutcome {
    pub(crate) fn with_model(status: SolveStatus, model: MaxSatModel, wall_time: Duration) -> Self {
        Self {
            status,
            model: Some(model),
            wall_time,
            message: String::new(),
        }
    }

    pub(crate) fn without_model(status: SolveStatus, message: impl Into<String>, wall_time: Duration) -> Self {
        debug_assert!(matches!(status, SolveStatus::Unknown | SolveStatus::Error));
        Self {
            status,
            model: None,
            wall_time,
            message: message.into(),
        }
    }
}

/// Runs the configured backend with the given wall-clock allowance.
pub fn solve(
    problem: &MaxSatProblem,
    sub: &Subinstance,
    config: &SolverConfig,
    timeout: Duration,
) -> SolveOutcome {
    match &config.mode {
        SolverMode::Internal => solve_internal(problem, timeout),
        SolverMode::External(command) => solve_external(problem, command, timeout),
        SolverMode::Oracle => solve_oracle(problem, sub),
    }
}
