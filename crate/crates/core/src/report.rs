//! Versioned envelope for every emitted report.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Bumped on any field change of the envelope or a payload record.
pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
    pub offset: Option<usize>,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        let (kind, offset) = match e {
            Error::Grid(_) => ("grid", None),
            Error::Syntax { offset, .. } => ("syntax", Some(*offset)),
            Error::UnknownPrimitive { offset, .. } => ("unknown-primitive", Some(*offset)),
            Error::Arity { offset, .. } => ("arity", Some(*offset)),
            Error::Eval(_) => ("eval", None),
            Error::GridMismatch(_) => ("grid-mismatch", None),
            Error::Unsupported(_) => ("unsupported", None),
            Error::Precondition(_) => ("precondition", None),
            Error::ClosureExceeded { .. } => ("closure-exceeded", None),
            Error::Cone(_) => ("cone", None),
            Error::Io(_) => ("io", None),
            Error::Json(_) => ("json", None),
        };
        ErrorRecord {
            kind: kind.into(),
            message: e.to_string(),
            offset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    pub schema_version: String,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub status: Status,
    pub payload: serde_json::Value,
    pub warnings: Vec<String>,
    pub error: Option<ErrorRecord>,
    pub timing: Timing,
}

impl ReportEnvelope {
    pub fn new(command: impl Into<String>, config: BTreeMap<String, String>) -> Self {
        ReportEnvelope {
            schema_version: SCHEMA_VERSION.into(),
            command: command.into(),
            config,
            status: Status::Ok,
            payload: serde_json::Value::Null,
            warnings: Vec::new(),
            error: None,
            timing: Timing { wall_seconds: 0.0 },
        }
    }

    pub fn set_payload<T: Serialize>(&mut self, payload: &T) -> Result<()> {
        self.payload = serde_json::to_value(payload)?;
        Ok(())
    }

    pub fn fail_with(&mut self, e: &Error) {
        self.status = Status::Error;
        self.error = Some(e.into());
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let env: ReportEnvelope = serde_json::from_str(text)?;
        if env.schema_version != SCHEMA_VERSION {
            return Err(Error::Precondition(format!(
                "schema version {} (expected {SCHEMA_VERSION})",
                env.schema_version
            )));
        }
        Ok(env)
    }

    /// Serialized envelope without the timing field.
    pub fn deterministic_bytes(&self) -> Result<Vec<u8>> {
        let mut v = serde_json::to_value(self)?;
        if let Some(m) = v.as_object_mut() {
            m.remove("timing");
        }
        Ok(serde_json::to_vec(&v)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_determinism() {
        let mut cfg = BTreeMap::new();
        cfg.insert("signal".to_string(), "delta".to_string());
        let mut env = ReportEnvelope::new("wf", cfg);
        env.set_payload(&vec![0.1 + 0.2, 1.0 / 3.0, f64::MIN_POSITIVE]).unwrap();
        env.timing.wall_seconds = 1.5;
        let back = ReportEnvelope::from_json(&env.to_json().unwrap()).unwrap();
        assert_eq!(back, env);
        let mut other = env.clone();
        other.timing.wall_seconds = 2.0;
        assert_eq!(env.deterministic_bytes().unwrap(), other.deterministic_bytes().unwrap());
    }

    #[test]
    fn error_records_keep_offsets() {
        let e = crate::SignalExpr::parse("planewave(").unwrap_err();
        let r = ErrorRecord::from(&e);
        assert!(r.offset.is_some());
        let mut env = ReportEnvelope::new("wf", BTreeMap::new());
        env.fail_with(&e);
        assert_eq!(env.status, Status::Error);
    }

    #[test]
    fn rejects_other_schema() {
        let env = ReportEnvelope::new("stft", BTreeMap::new());
        let text = env.to_json().unwrap().replace(SCHEMA_VERSION, "0.0.1");
        assert!(ReportEnvelope::from_json(&text).is_err());
    }
}
