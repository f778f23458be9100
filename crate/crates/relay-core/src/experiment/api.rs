//! Request and error documents exchanged between the experiment service and its clients.

use serde::{Deserialize, Serialize};

use super::{execute, load, Command, Overrides, OutputFormat};
use crate::error::{Error, ErrorKind, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRequest {
    pub command: Command,
    /// TOML experiment document; overrides the preset's keys when both are given.
    #[serde(default)]
    pub config: Option<String>,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub format: OutputFormat,
}

impl RunRequest {
    pub fn new(command: Command) -> Self {
        Self { command, config: None, preset: None, overrides: Overrides::default(), format: OutputFormat::Csv }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub kind: ErrorKind,
    pub message: String,
}

impl From<&Error> for ErrorBody {
    fn from(e: &Error) -> Self {
        Self { kind: e.kind(), message: e.to_string() }
    }
}

/// Loads, executes and renders one request.
pub fn run(req: &RunRequest) -> Result<String> {
    let spec = load(req.preset.as_deref(), req.config.as_deref())?;
    execute(req.command, &spec, &req.overrides)?.render(req.format)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_json_defaults() {
        let r: RunRequest = serde_json::from_str(r#"{"command":"analyze","preset":"fig4"}"#).unwrap();
        assert_eq!(r.format, OutputFormat::Csv);
        assert_eq!(r.overrides, Overrides::default());
        assert!(serde_json::from_str::<RunRequest>(r#"{"command":"analyze","sed":1}"#).is_err());
    }

    #[test]
    fn error_body_carries_kind() {
        let b = ErrorBody::from(&Error::Infeasible("x".into()));
        assert_eq!(b.kind.exit_code(), 4);
        assert_eq!(serde_json::to_string(&b.kind).unwrap(), "\"infeasible\"");
    }
}
