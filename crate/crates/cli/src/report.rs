use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::commands::Outcome;
use crate::workspace::Diagnostic;

/// The report schema, published alongside the binary.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Serialize)]
pub struct Inputs {
    pub workspace: Option<String>,
    pub workspace_sha256: Option<String>,
    pub args: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub inputs: Inputs,
    pub holds: bool,
    pub exit_code: i32,
    pub result: Value,
    pub witnesses: Vec<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<Diagnostic>,
    #[serde(skip)]
    pub lines: Vec<String>,
}

impl Report {
    pub fn outcome(command: &str, path: &Path, hash: String, args: Value, o: Outcome) -> Self {
        Report {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: Inputs {
                workspace: Some(path.display().to_string()),
                workspace_sha256: Some(hash),
                args,
            },
            holds: o.holds,
            exit_code: if o.holds { 0 } else { 1 },
            result: o.result,
            witnesses: o.witnesses,
            error: None,
            lines: o.lines,
        }
    }

    pub fn error(command: &str, path: Option<&Path>, hash: Option<String>, args: Value, d: Diagnostic) -> Self {
        Report {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            inputs: Inputs {
                workspace: path.map(|p| p.display().to_string()),
                workspace_sha256: hash,
                args,
            },
            holds: false,
            exit_code: 2,
            result: Value::Null,
            witnesses: Vec::new(),
            error: Some(d),
            lines: Vec::new(),
        }
    }
}
