//! Line-oriented `key: value` records printed by the `mbilp` binary.

use std::fmt;

use mbilp::instance::{serialize_instance, IlpInstance};
use sha2::{Digest, Sha256};

/// First 16 hex digits of the SHA-256 of the serialized instance.
pub fn instance_hash(inst: &IlpInstance) -> String {
    let digest = Sha256::digest(serialize_instance(inst).as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// One result record. Missing values print as `-`; `extra` keeps any
/// further fields in order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunRecord {
    pub command: String,
    pub instance: Option<String>,
    pub seed: u64,
    pub method: Option<String>,
    pub status: String,
    pub value: Option<String>,
    pub solution: Option<Vec<i64>>,
    pub elapsed_ms: Option<u128>,
    pub failure_bound: Option<f64>,
    pub extra: Vec<(String, String)>,
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), |x| x.to_string())
}

impl fmt::Display for RunRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "command: {}", self.command)?;
        writeln!(f, "instance: {}", opt(&self.instance))?;
        writeln!(f, "seed: {}", self.seed)?;
        writeln!(f, "method: {}", opt(&self.method))?;
        writeln!(f, "status: {}", self.status)?;
        writeln!(f, "value: {}", opt(&self.value))?;
        let sol = self.solution.as_ref().map(|s| s.iter().map(i64::to_string).collect::<Vec<_>>().join(" "));
        writeln!(f, "solution: {}", opt(&sol))?;
        writeln!(f, "elapsed_ms: {}", opt(&self.elapsed_ms))?;
        writeln!(f, "failure_bound: {}", opt(&self.failure_bound))?;
        for (k, v) in &self.extra {
            writeln!(f, "{k}: {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, PartialEq, Eq, thiserror::Error)]
#[error("record line {line}: {msg}")]
pub struct RecordError {
    pub line: usize,
    pub msg: String,
}

impl RunRecord {
    pub fn parse(text: &str) -> Result<Self, RecordError> {
        let mut rec = RunRecord::default();
        let mut seen_status = false;
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let err = |msg: String| RecordError { line: idx + 1, msg };
            let (k, v) = line.split_once(": ").ok_or_else(|| err(format!("expected `key: value`, got {line:?}")))?;
            let some = |v: &str| (v != "-").then(|| v.to_string());
            match k {
                "command" => rec.command = v.to_string(),
                "instance" => rec.instance = some(v),
                "seed" => rec.seed = v.parse().map_err(|e| err(format!("seed: {e}")))?,
                "method" => rec.method = some(v),
                "status" => {
                    rec.status = v.to_string();
                    seen_status = true;
                }
                "value" => rec.value = some(v),
                "solution" => {
                    rec.solution = match v {
                        "-" => None,
                        _ => Some(
                            v.split_whitespace()
                                .map(|t| t.parse().map_err(|e| err(format!("solution: {e}"))))
                                .collect::<Result<_, _>>()?,
                        ),
                    }
                }
                "elapsed_ms" => {
                    rec.elapsed_ms = some(v).map(|s| s.parse()).transpose().map_err(|e| err(format!("elapsed: {e}")))?
                }
                "failure_bound" => {
                    rec.failure_bound =
                        some(v).map(|s| s.parse()).transpose().map_err(|e| err(format!("failure_bound: {e}")))?
                }
                _ => rec.extra.push((k.to_string(), v.to_string())),
            }
        }
        if rec.command.is_empty() || !seen_status {
            return Err(RecordError { line: 0, msg: "record needs command and status".into() });
        }
        Ok(rec)
    }

    /// The record with the elapsed time cleared, for determinism checks.
    pub fn without_timing(&self) -> Self {
        RunRecord { elapsed_ms: None, ..self.clone() }
    }
}
