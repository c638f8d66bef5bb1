use std::path::PathBuf;

use thiserror::Error;

use crate::phase::Phase;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("series too short: need at least {needed} months, got {got}")]
    Length { needed: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("input has no defined values")]
    EmptyInput,

    #[error("alignment error: {0}")]
    Alignment(String),

    #[error("{}:{line}: column `{column}`: {message}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        column: String,
        message: String,
    },

    #[error("{}:{line}: month ordering violated: {message}", file.display())]
    Ordering {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}:{line}: duplicate month {month}", file.display())]
    Duplicate {
        file: PathBuf,
        line: usize,
        month: String,
    },

    #[error("{}:{line}: column `{column}`: {message}", file.display())]
    Validation {
        file: PathBuf,
        line: usize,
        column: String,
        message: String,
    },

    #[error("design matrix is rank deficient (singular value ratio {ratio:.3e})")]
    Collinear { ratio: f64 },

    #[error("insufficient sample for {context}: need more than {needed} usable rows, got {got}")]
    SampleSize {
        context: String,
        needed: usize,
        got: usize,
    },

    #[error("insufficient sample at horizon {h}: need more than {needed} rows, got {got}")]
    HorizonSample { h: usize, needed: usize, got: usize },

    #[error("outcome has zero variance over the regression sample")]
    ZeroVarianceOutcome,

    #[error("shock series is degenerate (zero variance)")]
    DegenerateShock,

    #[error("phase `{0}` has no months")]
    EmptyPhase(Phase),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("zero standard error in {table} at horizon {h}; cannot weight residual")]
    Weight { table: String, h: usize },

    #[error("step size {dt} violates stability limit {limit}")]
    StepSize { dt: f64, limit: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("missing upstream outputs: {}", .0.join(", "))]
    MissingOutputs(Vec<String>),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in {}: {source}", file.display())]
    Csv {
        file: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    /// True for errors caused by malformed inputs or contract violations, as
    /// opposed to numerical trouble.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Collinear { .. } | Error::StepSize { .. })
    }
}
