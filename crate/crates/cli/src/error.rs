use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{file}: {path}: {message} (line {line}, column {column})")]
    Parse {
        file: PathBuf,
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{file}: {path}: {message} (line {line}, column {column})")]
    UnknownField {
        file: PathBuf,
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{file}: unsupported scenario version `{found}` (expected `{expected}`)")]
    Version {
        file: PathBuf,
        found: String,
        expected: &'static str,
    },

    #[error("{file}: header mismatch: expected `{expected}`, found `{found}`")]
    HeaderMismatch {
        file: PathBuf,
        expected: String,
        found: String,
    },

    #[error("{file}: row {row}: column `{column}`: {message}")]
    Csv {
        file: PathBuf,
        row: u64,
        column: String,
        message: String,
    },

    #[error("{file}: row {row}: feature `{column}` is not finite")]
    NonFiniteFeature { file: PathBuf, row: u64, column: String },

    #[error("{file}: row {row}: system id `{id}` appears more than once")]
    DuplicateSystemId { file: PathBuf, row: u64, id: String },

    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: vagueness_core::Error,
    },

    #[error("{0}")]
    Usage(String),

    #[error("cannot read {file}: {source}")]
    Read {
        file: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {file}: {source}")]
    Write {
        file: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn model(context: impl Into<String>, source: vagueness_core::Error) -> Self {
        CliError::Model {
            context: context.into(),
            source,
        }
    }

    /// Short machine-readable tag printed with the message.
    pub fn code(&self) -> &'static str {
        use vagueness_core::Error as E;
        match self {
            CliError::Parse { .. } => "parse_error",
            CliError::UnknownField { .. } => "unknown_field",
            CliError::Version { .. } => "version",
            CliError::HeaderMismatch { .. } => "header_mismatch",
            CliError::Csv { .. } => "parse_error",
            CliError::NonFiniteFeature { .. } => "non_finite_feature",
            CliError::DuplicateSystemId { .. } => "duplicate_system_id",
            CliError::Model { source, .. } => match source {
                E::SchemaMismatch { .. } | E::SchemaConflict(_) | E::InvalidSchema(_) => "schema_mismatch",
                E::ArityMismatch { .. } => "arity_mismatch",
                E::DuplicateSystemId(_) => "duplicate_system_id",
                E::NonFiniteFeature { .. } => "non_finite_feature",
                E::UnfaithfulFramework { .. } | E::Quarantined => "faithfulness_violation",
                E::BoundsViolation { .. } => "bounds_violation",
                E::EmptyClearSet => "empty_clear_set",
                E::UnknownSystem(_) => "unknown_system",
                E::PreconditionUnmet(_) => "precondition_unmet",
                E::InvalidGeneratorConfig(_) => "invalid_generator_config",
                _ => "invalid_model",
            },
            CliError::Usage(_) => "usage",
            CliError::Read { .. } => "io",
            CliError::Write { .. } => "io",
            CliError::Internal(_) => "internal",
        }
    }

    /// 1 internal, 2 validation, 3 faithfulness violation.
    pub fn exit_code(&self) -> i32 {
        use vagueness_core::Error as E;
        match self {
            CliError::Model {
                source: E::UnfaithfulFramework { .. } | E::Quarantined,
                ..
            } => 3,
            CliError::Write { .. } | CliError::Internal(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
