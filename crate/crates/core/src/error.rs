use crate::vector::{ClassId, RecordId};

/// Errors produced by the engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degenerate vector: {0}")]
    DegenerateVector(&'static str),

    #[error("duplicate record id {0}")]
    DuplicateId(RecordId),

    #[error("class {0} is not present")]
    MissingClass(ClassId),

    #[error("store is empty")]
    EmptyStore,

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("invalid workload: {0}")]
    InvalidWorkload(&'static str),

    #[error("degenerate cost model: {0}")]
    DegenerateModel(&'static str),

    #[error("format error at byte {offset}: {reason}")]
    Format { offset: u64, reason: &'static str },

    #[error("data error at byte {offset}: {reason}")]
    Data { offset: u64, reason: &'static str },
}

impl Error {
    /// Stable, machine-readable category name.
    pub fn category(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension",
            Error::DegenerateVector(_) => "degenerate-vector",
            Error::DuplicateId(_) => "conflict",
            Error::MissingClass(_) => "missing-class",
            Error::EmptyStore => "empty-store",
            Error::InvalidArgument(_) => "argument",
            Error::InvalidWorkload(_) => "invalid-workload",
            Error::DegenerateModel(_) => "degenerate-model",
            Error::Format { .. } => "format",
            Error::Data { .. } => "data",
        }
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
