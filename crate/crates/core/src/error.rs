use thiserror::Error;

use crate::domain::{Category, ValidationReport};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Sum of squared demands is zero, so the proportional price is undefined.
    #[error("degenerate customer group{}: all demands are zero", context(*.category, *.state))]
    DegenerateGroup {
        category: Option<Category>,
        state: Option<u8>,
    },

    #[error("degenerate off-peak window{}: total demand is zero", context(*.category, None))]
    DegenerateWindow { category: Option<Category> },

    #[error("market clearing price must be positive, got {0}")]
    NonPositiveMcp(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown customer `{0}`")]
    UnknownCustomer(String),

    #[error("customer `{id}` would have non-positive demand {demand}")]
    NonPositiveDemand { id: String, demand: f64 },

    #[error("datasets do not match: {0}")]
    MismatchedDatasets(String),

    #[error("scope selects no system states")]
    EmptyScope,

    #[error("signal does not cover state {0}")]
    MissingStateCoverage(u8),

    #[error("reference billing is zero for {signal} / {category} / state {state}")]
    ZeroReference {
        signal: String,
        category: Category,
        state: u8,
    },

    #[error("dataset failed validation:\n{0}")]
    InvalidDataset(ValidationReport),

    #[error("{source_name}:{line}: field `{field}`: {message}")]
    Parse {
        source_name: String,
        line: u64,
        field: String,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(
        source_name: &str,
        line: u64,
        field: &str,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Attach category and state context to a degenerate-group/window error.
    pub(crate) fn in_group(self, category: Category, state: Option<u8>) -> Self {
        match self {
            Error::DegenerateGroup { .. } => Error::DegenerateGroup {
                category: Some(category),
                state,
            },
            Error::DegenerateWindow { .. } => Error::DegenerateWindow {
                category: Some(category),
            },
            other => other,
        }
    }

    /// True for failures caused by unreadable or malformed input.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Io { .. })
    }
}

fn context(category: Option<Category>, state: Option<u8>) -> String {
    match (category, state) {
        (Some(c), Some(s)) => format!(" ({c}, state {s})"),
        (Some(c), None) => format!(" ({c})"),
        (None, Some(s)) => format!(" (state {s})"),
        (None, None) => String::new(),
    }
}
