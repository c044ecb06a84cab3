use std::io::Write;
use std::process::ExitCode;

use serde::Serialize;
use serde_json::{json, Value};
use specker_core::Error;

use crate::Command;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// The analysis succeeded and found no joint distribution.
    Infeasible,
}

/// Successful run: JSON on stdout (or CSV when `csv` is set).
pub struct Report {
    pub command: &'static str,
    pub inputs: Value,
    pub results: Value,
    pub status: Status,
    pub csv: Option<String>,
}

impl Report {
    pub fn ok(command: &'static str, inputs: Value, results: Value) -> Self {
        Report { command, inputs, results, status: Status::Ok, csv: None }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "status": self.status,
        })
    }

    pub fn emit(mut self) -> ExitCode {
        let text = match self.csv.take() {
            Some(text) => text,
            None => pretty(&self.to_json()),
        };
        write_stdout(&text);
        ExitCode::from(match self.status {
            Status::Ok => 0,
            Status::Infeasible => 3,
        })
    }
}

/// Validation/parse failure (exit 2) or internal error (exit 1).
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn invalid(message: impl Into<String>) -> Self {
        Failure { code: 2, kind: "invalid_input", message: message.into() }
    }

    pub fn emit(self, command: &str) -> ExitCode {
        log::error!("{}", self.message);
        eprintln!("specker-kit {command}: {}", self.message);
        let doc = json!({
            "command": command,
            "error": {"kind": self.kind, "message": self.message},
            "status": if self.code == 2 { "invalid" } else { "error" },
        });
        write_stdout(&pretty(&doc));
        ExitCode::from(self.code)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Parse(_) => (2, "parse"),
            Error::Validation(_) => (2, "validation"),
            Error::ChainViolation(_) => (2, "chain_violation"),
            Error::InvalidScenario(_) | Error::InvalidStats(_) => (2, "validation"),
            Error::TooLarge { .. } => (2, "too_large"),
            Error::InvalidModel(_) | Error::NotFactorizable { .. } => (2, "invalid_model"),
            Error::InvalidDecomposition(_) => (2, "invalid_decomposition"),
            Error::InvalidQuantum(_) => (2, "invalid_quantum"),
            Error::NotJointlyMeasurable { .. } => (2, "not_jointly_measurable"),
            Error::MarginalMismatch { .. } | Error::SolverStall { .. } | Error::Internal(_) => (1, "internal"),
        };
        Failure { code, kind, message: e.to_string() }
    }
}

pub fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Check { .. } => "check",
        Command::Vertices => "vertices",
        Command::Decompose { .. } => "decompose",
        Command::Fine { .. } => "fine",
        Command::Ontmax { .. } => "ontmax",
        Command::Relabel { .. } => "relabel",
        Command::QuantumScan { .. } => "quantum-scan",
        Command::Sample { .. } => "sample",
    }
}

fn pretty(doc: &Value) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("report serializes");
    text.push('\n');
    text
}

/// Writes to stdout, ignoring a closed pipe (e.g. `| head`).
fn write_stdout(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}
