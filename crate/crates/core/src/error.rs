use thiserror::Error;

use crate::partition::FeasibilityVerdict;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("too few samples: got {n}, need at least {required}{}", suffix(.advice))]
    TooFewSamples {
        n: usize,
        required: usize,
        /// How to change the configuration so it fits, when known.
        advice: Option<String>,
    },

    #[error(
        "stratification infeasible: class {class} has {count} samples, need at least {required}{}",
        suffix(.advice)
    )]
    StratificationInfeasible {
        class: usize,
        count: usize,
        required: usize,
        advice: Option<String>,
    },

    #[error("{}", .0.message)]
    Infeasible(FeasibilityVerdict),

    #[error("invalid partition plan: {0}")]
    InvalidPlan(String),

    #[error("length mismatch: {left} true labels vs {right} predictions")]
    LengthMismatch { left: usize, right: usize },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("cannot score an empty test set")]
    EmptyTestSet,

    #[error("binary F-score requires exactly 2 classes, got {0}")]
    NotBinary(usize),

    #[error("cannot fit a model on an empty training set")]
    EmptyTrainingSet,

    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("class {0} has no training samples")]
    DegenerateClass(usize),

    #[error("need at least 2 repetitions, got {0}")]
    InsufficientRepetitions(usize),

    #[error("a reference risk is required for the MSE decomposition")]
    MissingReference,

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("non-numeric feature at row {row}, column {column}: {value:?}")]
    NonNumericFeature {
        row: usize,
        column: String,
        value: String,
    },

    #[error("missing label at row {row}")]
    MissingLabel { row: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn suffix(advice: &Option<String>) -> String {
    advice.as_ref().map_or_else(String::new, |a| format!(". {a}"))
}

impl Error {
    /// True for errors caused by a configuration the data cannot support
    /// (too few samples, classes too small for stratification).
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::TooFewSamples { .. }
                | Error::StratificationInfeasible { .. }
                | Error::Infeasible(_)
        )
    }
}
