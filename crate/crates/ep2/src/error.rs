//! Crate-wide error type.

use crate::solvers::SolveReport;
use thiserror::Error;

/// Errors produced by the library.
///
/// Variants split into two classes: input/validation problems (rejected
/// before any numerics run) and solver-side failures. [`Error::exit_code`]
/// maps the class onto the CLI exit-code convention (1 for validation,
/// 2 for solver failures).
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid input: malformed configuration, bad grid sizes, budget guards.
    #[error("{0}")]
    Validation(String),

    /// A theorem hypothesis required by the selected method does not hold.
    #[error("{0}")]
    Hypothesis(String),

    /// A quantity left its mathematical domain (wrong sign regime, etc.).
    #[error("{0}")]
    Domain(String),

    /// An entry that must be strictly positive was not.
    #[error("nonpositive value {value} at index {index}")]
    NonpositiveEntry { index: usize, value: f64 },

    /// The Jacobian of a Newton step could not be factorised.
    #[error("singular Jacobian")]
    Singular,

    /// Iteration budget exhausted; the best iterate found is attached.
    #[error("iteration budget exhausted (best residual {})", .report.residual_inf)]
    Budget { report: Box<SolveReport> },

    /// Line-search descent could make no further progress.
    #[error("descent stalled (best residual {})", .report.residual_inf)]
    Stalled { report: Box<SolveReport> },

    /// Continuation step size underflowed before reaching the target.
    #[error("homotopy path lost at lambda = {lambda} (step underflow)")]
    PathLost { lambda: f64, last: Vec<f64> },

    /// Small-c continuation stopped short of the requested c; the report
    /// carries the solution at the largest c reached.
    #[error("continuation reached c = {c_max}, short of the requested value")]
    CMaxReached { c_max: f64, report: Box<SolveReport> },

    /// Interior values collapsed towards zero where the theory forbids it.
    #[error("interior degeneracy: u[{index}] = {value}")]
    InteriorDegeneracy { index: usize, value: f64 },

    /// A converged iterate escaped the bracketing bounds it was meant to
    /// respect; indicates invalid upper/lower solutions or a bug.
    #[error("bound violation after convergence: u[{index}] = {value} vs bound {bound}")]
    BoundViolation { index: usize, value: f64, bound: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code class: 1 for configuration/validation errors,
    /// 2 for solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Io(_) | Error::Json(_) => 1,
            _ => 2,
        }
    }
}
