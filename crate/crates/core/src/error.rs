use std::io;

use thiserror::Error;

/// Every failure the toolkit can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("derived field {field_id} is already present in the feature vector")]
    DoubleAugmentation { field_id: u32 },

    #[error("entropy of the base rate is undefined (gamma = {gamma})")]
    UndefinedEntropy { gamma: f64 },

    #[error("AUC is undefined: {positives} positives, {negatives} negatives")]
    UndefinedAuc { positives: u64, negatives: u64 },

    #[error("generation error: {0}")]
    Generation(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("timestamp order violation at line {line}: {ts} < {previous}")]
    TimestampOrder { line: usize, ts: i64, previous: i64 },

    #[error("replay error: {0}")]
    Replay(String),

    #[error("invalid experiment plan: {0}")]
    Plan(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("report error: {0}")]
    Report(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Short machine-readable tag, used in the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::SchemaMismatch(_) => "schema_mismatch",
            Error::Input(_) => "input",
            Error::ContractViolation(_) => "contract_violation",
            Error::DoubleAugmentation { .. } => "double_augmentation",
            Error::UndefinedEntropy { .. } => "undefined_entropy",
            Error::UndefinedAuc { .. } => "undefined_auc",
            Error::Generation(_) => "generation",
            Error::Parse { .. } => "parse",
            Error::TimestampOrder { .. } => "timestamp_order",
            Error::Replay(_) => "replay",
            Error::Plan(_) => "plan",
            Error::Checkpoint(_) => "checkpoint",
            Error::Report(_) => "report",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
