use std::fmt;

use thiserror::Error;

/// Machine-readable error category. The string form is stable and is what
/// the CLI prints and the C ABI exposes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCode {
    MalformedLine,
    MissingField,
    InvalidField,
    UnknownTask,
    NonMonotoneTimestamps,
    TimeBounds,
    DuplicateRunId,
    InvalidTask,
    InvalidStateMap,
    EmptySample,
    DegenerateTable,
    EmptyCohort,
    SizeExceedsPool,
    InvalidProfile,
    InvalidArgument,
    Io,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::MalformedLine => "MALFORMED_LINE",
            ErrorCode::MissingField => "MISSING_FIELD",
            ErrorCode::InvalidField => "INVALID_FIELD",
            ErrorCode::UnknownTask => "UNKNOWN_TASK",
            ErrorCode::NonMonotoneTimestamps => "NON_MONOTONE_TIMESTAMPS",
            ErrorCode::TimeBounds => "TIME_BOUNDS",
            ErrorCode::DuplicateRunId => "DUPLICATE_RUN_ID",
            ErrorCode::InvalidTask => "INVALID_TASK",
            ErrorCode::InvalidStateMap => "INVALID_STATE_MAP",
            ErrorCode::EmptySample => "EMPTY_SAMPLE",
            ErrorCode::DegenerateTable => "DEGENERATE_TABLE",
            ErrorCode::EmptyCohort => "EMPTY_COHORT",
            ErrorCode::SizeExceedsPool => "SIZE_EXCEEDS_POOL",
            ErrorCode::InvalidProfile => "INVALID_PROFILE",
            ErrorCode::InvalidArgument => "INVALID_ARGUMENT",
            ErrorCode::Io => "IO_ERROR",
        }
    }

    /// Process exit code used by the CLI: 2 validation, 3 I/O, 4 analysis
    /// precondition.
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorCode::Io => 3,
            ErrorCode::MalformedLine
            | ErrorCode::MissingField
            | ErrorCode::InvalidField
            | ErrorCode::UnknownTask
            | ErrorCode::NonMonotoneTimestamps
            | ErrorCode::TimeBounds
            | ErrorCode::DuplicateRunId
            | ErrorCode::InvalidTask
            | ErrorCode::InvalidStateMap
            | ErrorCode::InvalidProfile => 2,
            ErrorCode::EmptySample
            | ErrorCode::DegenerateTable
            | ErrorCode::EmptyCohort
            | ErrorCode::SizeExceedsPool
            | ErrorCode::InvalidArgument => 4,
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed JSON: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("line {line}: missing required field `{field}`")]
    MissingField { line: usize, field: String },
    #[error("line {line}: invalid field: {message}")]
    InvalidField { line: usize, message: String },
    #[error("line {line}: run `{run_id}` references unknown task `{task_id}`")]
    UnknownTask {
        line: usize,
        run_id: String,
        task_id: String,
    },
    #[error("line {line}: run `{run_id}` has decreasing timestamp at event {index}")]
    NonMonotoneTimestamps {
        line: usize,
        run_id: String,
        index: usize,
    },
    #[error("line {line}: run `{run_id}` events fall outside [start_time, end_time]")]
    TimeBounds { line: usize, run_id: String },
    #[error("line {line}: duplicate run_id `{run_id}`")]
    DuplicateRunId { line: usize, run_id: String },
    #[error("invalid task file: {0}")]
    InvalidTask(String),
    #[error("invalid state map: {0}")]
    InvalidStateMap(String),
    #[error("empty sample: {0}")]
    EmptySample(String),
    #[error("degenerate contingency table: {0}")]
    DegenerateTable(String),
    #[error("empty cohort: {0}")]
    EmptyCohort(String),
    #[error("requested size {requested} exceeds pool of {pool}")]
    SizeExceedsPool { requested: usize, pool: usize },
    #[error("invalid behavior profile: {0}")]
    InvalidProfile(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn code(&self) -> ErrorCode {
        match self {
            Error::MalformedLine { .. } => ErrorCode::MalformedLine,
            Error::MissingField { .. } => ErrorCode::MissingField,
            Error::InvalidField { .. } => ErrorCode::InvalidField,
            Error::UnknownTask { .. } => ErrorCode::UnknownTask,
            Error::NonMonotoneTimestamps { .. } => ErrorCode::NonMonotoneTimestamps,
            Error::TimeBounds { .. } => ErrorCode::TimeBounds,
            Error::DuplicateRunId { .. } => ErrorCode::DuplicateRunId,
            Error::InvalidTask(_) => ErrorCode::InvalidTask,
            Error::InvalidStateMap(_) => ErrorCode::InvalidStateMap,
            Error::EmptySample(_) => ErrorCode::EmptySample,
            Error::DegenerateTable(_) => ErrorCode::DegenerateTable,
            Error::EmptyCohort(_) => ErrorCode::EmptyCohort,
            Error::SizeExceedsPool { .. } => ErrorCode::SizeExceedsPool,
            Error::InvalidProfile(_) => ErrorCode::InvalidProfile,
            Error::InvalidArgument(_) => ErrorCode::InvalidArgument,
            Error::Io { .. } => ErrorCode::Io,
        }
    }

    /// 1-based line number for per-line trace diagnostics.
    pub fn line(&self) -> Option<usize> {
        match self {
            Error::MalformedLine { line, .. }
            | Error::MissingField { line, .. }
            | Error::InvalidField { line, .. }
            | Error::UnknownTask { line, .. }
            | Error::NonMonotoneTimestamps { line, .. }
            | Error::TimeBounds { line, .. }
            | Error::DuplicateRunId { line, .. } => Some(*line),
            _ => None,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
