//! Error types shared across the crate.

use std::fmt;

use thiserror::Error;

use crate::model::Time;

/// One broken task-set or job-set constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Identifier of the offending task or job, `None` for set-level problems.
    pub subject: Option<String>,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    DeadlineExceedsPeriod {
        deadline: Time,
        period: Time,
    },
    WidthExceedsPlatform {
        width: u32,
        m: u32,
    },
    NonPositiveField(&'static str),
    DuplicateId,
    ExecutionExceedsDeadline {
        wcet: Time,
        window: Time,
    },
    Empty,
    /// A document declaring both periodic tasks and explicit jobs.
    MixedWorkload,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(s) = &self.subject {
            write!(f, "{s}: ")?;
        }
        match &self.kind {
            ViolationKind::DeadlineExceedsPeriod { deadline, period } => {
                write!(f, "deadline {deadline} exceeds period {period}")
            }
            ViolationKind::WidthExceedsPlatform { width, m } => {
                write!(f, "width {width} exceeds platform size {m}")
            }
            ViolationKind::NonPositiveField(name) => write!(f, "field `{name}` must be positive"),
            ViolationKind::DuplicateId => write!(f, "duplicate id"),
            ViolationKind::ExecutionExceedsDeadline { wcet, window } => {
                write!(
                    f,
                    "execution requirement {wcet} exceeds deadline window {window}"
                )
            }
            ViolationKind::Empty => write!(f, "no tasks or jobs"),
            ViolationKind::MixedWorkload => write!(f, "both tasks and jobs declared"),
        }
    }
}

/// Returned by task-set and job-set validation; carries every violation found.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid task set:")?;
        for v in &self.violations {
            write!(f, " [{v}]")?;
        }
        Ok(())
    }
}

impl ValidationError {
    pub fn has(&self, pred: impl Fn(&ViolationKind) -> bool) -> bool {
        self.violations.iter().any(|v| pred(&v.kind))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithmeticError {
    #[error("integer overflow while computing {what}")]
    Overflow { what: &'static str },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("execution time must be at least 1, got 0")]
    Zero,
    #[error("execution time {actual} of job {job} exceeds its worst case {wcet}")]
    ExceedsWorstCase {
        job: String,
        actual: Time,
        wcet: Time,
    },
    #[error("profile refers to unknown task or job `{0}`")]
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("horizon {requested} exceeds the configured cap {cap}")]
    HorizonOverflow { requested: Time, cap: Time },
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Arithmetic(#[from] ArithmeticError),
    #[error("analysis window of {required} time units exceeds the configured cap {cap}")]
    WindowTooLarge { required: Time, cap: Time },
    #[error("policy `{0}` is not predictable for this priority order; pass force to test the worst case only")]
    PolicyNotPredictable(String),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown field at line {line}, column {column}: {message}")]
    UnknownField {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("bad priority directive: {0}")]
    Priority(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
