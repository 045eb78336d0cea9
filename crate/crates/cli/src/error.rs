use std::fmt;

use hb_core::analysis::AnalysisError;
use hb_core::learning::LearningError;
use hb_core::model::ModelError;
use hb_core::pipeline::PipelineError;

/// What went wrong, grouped by the process exit code it maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or unreadable input: exit 2.
    Input,
    /// Forced edges that cannot coexist with the other constraints: exit 3.
    Infeasible,
    /// Anything else: exit 1.
    Runtime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Input,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        CliError {
            kind: ErrorKind::Runtime,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Runtime => 1,
            ErrorKind::Input => 2,
            ErrorKind::Infeasible => 3,
        }
    }

    /// Prefix the message with where the error came from, e.g. a file name.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        let kind = match &e {
            PipelineError::Schema { .. }
            | PipelineError::MissingColumn(_)
            | PipelineError::DuplicateKey { .. }
            | PipelineError::Recipe(_)
            | PipelineError::MonthOutOfSeason(_)
            | PipelineError::Io(_) => ErrorKind::Input,
            PipelineError::InColumn { source, .. } if matches!(**source, PipelineError::Schema { .. }) => {
                ErrorKind::Input
            }
            _ => ErrorKind::Runtime,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        let kind = match &e {
            ModelError::ForcedAndForbidden(..) | ModelError::InconsistentForced(_) => ErrorKind::Infeasible,
            ModelError::ConstraintFormat(_)
            | ModelError::UnknownVariable(_)
            | ModelError::BinOutOfRange { .. }
            | ModelError::TargetAsEvidence(_) => ErrorKind::Input,
            _ => ErrorKind::Runtime,
        };
        CliError {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<LearningError> for CliError {
    fn from(e: LearningError) -> Self {
        match e {
            LearningError::InfeasibleConstraints(_) => CliError {
                kind: ErrorKind::Infeasible,
                message: e.to_string(),
            },
            LearningError::ModelFormat(_) => CliError::input(e.to_string()),
            LearningError::Model(m) => m.into(),
            other => CliError::runtime(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::input(e.to_string())
    }
}
