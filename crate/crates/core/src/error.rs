use thiserror::Error;

use crate::trainer::EscalationRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("row {row}: label {value} is not 0 or 1")]
    InvalidLabel { row: usize, value: f64 },

    #[error("evaluation grid is empty")]
    EmptyGrid,

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("constraint on feature {feature} is decreasing; normalize directions before training")]
    NotNormalized { feature: usize },

    #[error("no evaluation points for constrained feature {feature}")]
    MissingEvalPoints { feature: usize },

    #[error("pair ({dominant}, {dominated}) has disjoint observed ranges")]
    DisjointRanges { dominant: usize, dominated: usize },

    #[error("non-finite objective at epoch {epoch} (lambda={lambda}, eta={eta}); reduce the step size")]
    Diverged { epoch: usize, lambda: f64, eta: f64 },

    #[error("monotonicity constraints still violated after {} escalation rounds", .log.len().saturating_sub(1))]
    ConstraintsUnsatisfied { log: Vec<EscalationRecord> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("row {row}, column `{column}`: cannot parse `{value}`")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("column `{column}`: unknown code `{value}`")]
    UnknownCode { column: String, value: String },

    #[error("file has no data rows")]
    EmptyFile,

    #[error("input is already prepared; refusing to apply the recipe twice")]
    AlreadyPrepared,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the input data rather than configuration or training.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::EmptyDataset
                | Error::InvalidLabel { .. }
                | Error::MissingColumn(_)
                | Error::ParseCell { .. }
                | Error::UnknownCode { .. }
                | Error::EmptyFile
                | Error::AlreadyPrepared
                | Error::Io(_)
                | Error::Csv(_)
                | Error::DisjointRanges { .. }
        )
    }

    pub fn is_training_error(&self) -> bool {
        matches!(
            self,
            Error::Diverged { .. } | Error::ConstraintsUnsatisfied { .. }
        )
    }
}
