use std::path::PathBuf;

use thiserror::Error;

use crate::model::{ClassId, MethodId, Violation};

/// Integrity and contract errors raised by the metric engines and the
/// suggester.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("model is invalid ({} violation(s)): {}", .0.len(), summarize(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown {0}")]
    UnknownMethod(MethodId),
    #[error("unknown {0}")]
    UnknownClass(ClassId),
    #[error("similarity of {0} with itself is undefined")]
    SelfPair(MethodId),
    #[error("{method} is not owned by {claimed}")]
    NotOwner { method: MethodId, claimed: ClassId },
    #[error("origin and destination are both {0}")]
    SameClass(ClassId),
    #[error("worker count must be at least 1")]
    NoWorkers,
}

fn summarize(violations: &[Violation]) -> String {
    const SHOWN: usize = 5;
    let mut text = violations
        .iter()
        .take(SHOWN)
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ");
    if violations.len() > SHOWN {
        text.push_str(&format!("; and {} more", violations.len() - SHOWN));
    }
    text
}

/// Failures while reading or writing facts files.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema_version {found:?} (supported: {supported:?})")]
    UnsupportedSchema {
        found: String,
        supported: &'static str,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("n_methods ({methods}) must be at least n_classes ({classes})")]
    TooFewMethods { methods: usize, classes: usize },
    #[error("intra_class_bias must lie in [0, 1], got {0}")]
    BiasOutOfRange(f64),
    #[error("{0} must be a finite non-negative number")]
    NegativeThreshold(&'static str),
}
