use std::io::{self, Write};
use std::path::PathBuf;

use partition_crt_core::{CongruenceError, IdentityError, PartitionError};
use serde::Serialize;
use thiserror::Error;

use crate::{Format, EXIT_CONSTRUCTION, EXIT_USAGE};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("malformed instance in {path}: {source}")]
    Instance {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Construction(#[from] IdentityError),
    #[error(transparent)]
    Congruence(#[from] CongruenceError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error("cannot write output: {0}")]
    Write(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Construction(_) => EXIT_CONSTRUCTION,
            _ => EXIT_USAGE,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) | CliError::Congruence(_) | CliError::Partition(_) => "usage",
            CliError::Read { .. } | CliError::Write(_) => "io",
            CliError::Instance { .. } => "instance",
            CliError::Construction(_) => "construction",
        }
    }

    /// Name of the violated builder check, if any.
    fn violation(&self) -> Option<&'static str> {
        let CliError::Construction(e) = self else {
            return None;
        };
        Some(match e {
            IdentityError::InvalidParams(_) => "InvalidParams",
            IdentityError::ChainViolation { .. } => "ChainViolation",
            IdentityError::DistinctnessViolation { .. } => "DistinctnessViolation",
            IdentityError::DisjointnessViolation(_) => "DisjointnessViolation",
            IdentityError::WrongShape(_) => "WrongShape",
        })
    }
}

#[derive(Serialize)]
struct ErrorDoc<'a> {
    pass: bool,
    exit_code: u8,
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<&'a str>,
    message: String,
}

pub(crate) fn report(e: &CliError, format: Format, out: &mut dyn Write, err: &mut dyn Write) {
    let _ = writeln!(err, "error: {e}");
    if format == Format::Json {
        let doc = ErrorDoc {
            pass: false,
            exit_code: e.exit_code(),
            error: ErrorBody {
                kind: e.kind(),
                violation: e.violation(),
                message: e.to_string(),
            },
        };
        if serde_json::to_writer_pretty(&mut *out, &doc).is_ok() {
            let _ = writeln!(out);
        }
    }
}
