use std::path::PathBuf;

use serde_json::{json, Value};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A polynomial that failed to parse, kept for the caret display.
    #[error("{source}")]
    Poly {
        input: String,
        #[source]
        source: cylfi::Error,
    },

    #[error(transparent)]
    Engine(#[from] cylfi::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Read { .. } | CliError::Poly { .. } => EXIT_USAGE,
            CliError::Write { .. } => EXIT_NUMERICAL,
            CliError::Engine(e) => match e {
                cylfi::Error::Shape(_)
                | cylfi::Error::Domain(_)
                | cylfi::Error::Resource(_)
                | cylfi::Error::Truncation { .. }
                | cylfi::Error::UnsupportedDimension(_)
                | cylfi::Error::Parse { .. }
                | cylfi::Error::Invalid(_) => EXIT_USAGE,
                cylfi::Error::NumericalDegeneracy(_)
                | cylfi::Error::Singular(_)
                | cylfi::Error::InsufficientData(_)
                | cylfi::Error::Extrapolation { .. }
                | cylfi::Error::Convergence { .. }
                | cylfi::Error::BoxTooSmall { .. } => EXIT_NUMERICAL,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Read { .. } => "read",
            CliError::Write { .. } => "write",
            CliError::Poly { source, .. } => source.kind(),
            CliError::Engine(e) => e.kind(),
        }
    }

    /// The machine-readable form printed on stderr.
    pub fn to_json(&self) -> Value {
        let mut body = json!({
            "kind": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        let extra = match self {
            CliError::Poly {
                input,
                source: cylfi::Error::Parse { column, .. },
            } => Some(json!({
                "column": column,
                "input": input,
                "caret": format!("{}^", " ".repeat(column.saturating_sub(1))),
            })),
            CliError::Engine(cylfi::Error::Convergence { deltas, .. }) => Some(json!({ "deltas": deltas })),
            CliError::Engine(cylfi::Error::Truncation { requested, max }) => {
                Some(json!({ "requested": requested, "max": max }))
            }
            CliError::Engine(cylfi::Error::Extrapolation { condition, .. }) => {
                Some(json!({ "condition": condition }))
            }
            _ => None,
        };
        if let (Some(Value::Object(extra)), Value::Object(map)) = (extra, &mut body) {
            map.extend(extra);
        }
        json!({ "error": body })
    }
}
