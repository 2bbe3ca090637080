//! Newline-delimited JSON exchanged with adapters over stdin/stdout.
//!
//! One request line yields exactly one response line. Requests:
//!
//! ```json
//! {"v":1,"command":"capabilities"}
//! {"v":1,"command":"run_test","mode":"classification","smoketest":"UNIFORM",
//!  "target":{"package":"weka.classifiers.trees","class":"J48"},
//!  "params":{"M":10,"A":false},
//!  "train":{"csv":"/data/UNIFORM/train.csv","arff":"...","manifest":"..."},
//!  "test":{"csv":"...","arff":"...","manifest":"..."},
//!  "memory_limit_mb":null}
//! ```
//!
//! Responses:
//!
//! ```json
//! {"v":1,"status":"ok","feature_types":["double","categorical"],"modes":["classification"]}
//! {"v":1,"status":"ok"}
//! {"v":1,"status":"error","error_type":"ValueError","message":"...","details":"..."}
//! ```
//!
//! Flags are sent as JSON booleans.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Mode, SmokeTestId};
use crate::combinatorics::Assignment;
use crate::datagen::FeatureKind;

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("malformed message: {0}")]
    Malformed(String),
    #[error("unsupported protocol version {0}")]
    Version(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Target {
    pub package: String,
    pub class: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataRef {
    pub csv: String,
    pub arff: String,
    pub manifest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum RequestBody {
    Capabilities,
    RunTest {
        mode: Mode,
        smoketest: SmokeTestId,
        target: Target,
        params: Assignment,
        train: DataRef,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        test: Option<DataRef>,
        #[serde(default)]
        memory_limit_mb: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdapterRequest {
    pub v: u32,
    #[serde(flatten)]
    pub body: RequestBody,
}

impl AdapterRequest {
    pub fn capabilities() -> Self {
        Self {
            v: PROTOCOL_VERSION,
            body: RequestBody::Capabilities,
        }
    }

    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).unwrap_or_default();
        s.push('\n');
        s
    }
}

pub fn parse_request(line: &str) -> Result<AdapterRequest, ProtocolError> {
    let req: AdapterRequest =
        serde_json::from_str(line.trim()).map_err(|e| ProtocolError::Malformed(e.to_string()))?;
    if req.v != PROTOCOL_VERSION {
        return Err(ProtocolError::Version(req.v));
    }
    if let RequestBody::RunTest { mode, test, .. } = &req.body {
        if *mode == Mode::Classification && test.is_none() {
            return Err(ProtocolError::Malformed(
                "classification requests must name a test partition".into(),
            ));
        }
    }
    Ok(req)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdapterResponse {
    #[serde(default = "default_version")]
    pub v: u32,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_types: Option<Vec<FeatureKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<Mode>>,
}

fn default_version() -> u32 {
    PROTOCOL_VERSION
}

impl AdapterResponse {
    pub fn ok() -> Self {
        Self {
            v: PROTOCOL_VERSION,
            status: Status::Ok,
            error_type: None,
            message: None,
            details: None,
            feature_types: None,
            modes: None,
        }
    }

    pub fn error(error_type: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            status: Status::Error,
            error_type: Some(error_type.into()),
            message: Some(message.into()),
            ..Self::ok()
        }
    }

    pub fn capabilities(feature_types: Vec<FeatureKind>, modes: Vec<Mode>) -> Self {
        Self {
            feature_types: Some(feature_types),
            modes: Some(modes),
            ..Self::ok()
        }
    }

    /// `error_type: message`, or whichever of the two is present.
    pub fn error_text(&self) -> String {
        match (self.error_type.as_deref(), self.message.as_deref()) {
            (Some(t), Some(m)) => format!("{t}: {m}"),
            (Some(t), None) => t.to_string(),
            (None, Some(m)) => m.to_string(),
            (None, None) => String::new(),
        }
    }

    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).unwrap_or_default();
        s.push('\n');
        s
    }
}

pub fn parse_response(line: &str) -> Result<AdapterResponse, ProtocolError> {
    let resp: AdapterResponse =
        serde_json::from_str(line.trim()).map_err(|e| ProtocolError::Malformed(e.to_string()))?;
    if resp.v != PROTOCOL_VERSION {
        return Err(ProtocolError::Version(resp.v));
    }
    Ok(resp)
}

/// What an adapter can handle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Capabilities {
    pub feature_types: Vec<FeatureKind>,
    pub modes: Vec<Mode>,
}

impl Capabilities {
    pub fn from_response(resp: &AdapterResponse) -> Result<Self, ProtocolError> {
        if resp.status != Status::Ok {
            return Err(ProtocolError::Malformed(format!(
                "capabilities request failed: {}",
                resp.error_text()
            )));
        }
        match (&resp.feature_types, &resp.modes) {
            (Some(f), Some(m)) => Ok(Self {
                feature_types: f.clone(),
                modes: m.clone(),
            }),
            _ => Err(ProtocolError::Malformed(
                "capabilities response lacks `feature_types` or `modes`".into(),
            )),
        }
    }

    pub fn supports(&self, mode: Mode, kind: FeatureKind) -> bool {
        self.modes.contains(&mode) && self.feature_types.contains(&kind)
    }
}
