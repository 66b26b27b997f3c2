use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numeric failure: {message} (last bracket [{lo:e}, {hi:e}])")]
    NumericFailure { message: String, lo: f64, hi: f64 },

    #[error("box {0} has zero measure")]
    ZeroMeasureBox(String),

    #[error("infeasible split at node {path} (axis {axis}): {}", infeasible_detail(*.best_ratio, *.best_segment_max))]
    InfeasibleSplit {
        path: String,
        axis: usize,
        best_ratio: Option<f64>,
        best_segment_max: Option<f64>,
    },

    #[error("candidate undefined at point ({x1:e}, {x2:e})")]
    CandidateDomain { x1: f64, x2: f64 },

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Precondition(_)
            | Error::ZeroMeasureBox(_)
            | Error::CandidateDomain { .. }
            | Error::Parse { .. } => 2,
            Error::NumericFailure { .. } => 3,
            Error::InfeasibleSplit { .. } => 4,
            Error::Io(_) | Error::Csv(_) => 1,
        }
    }
}

fn infeasible_detail(ratio: Option<f64>, segment_max: Option<f64>) -> String {
    match (ratio, segment_max) {
        (None, _) => "no interior breakpoint to split at".to_string(),
        (Some(r), None) => format!("no breakpoint inside the ratio window (closest ratio {r})"),
        (Some(r), Some(m)) => format!(
            "every in-window segment leaves the domain (closest ratio {r}, smallest segment max {m})"
        ),
    }
}
