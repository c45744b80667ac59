//! Line-delimited JSON protocol that exposes an [`Environment`] over TCP.
//!
//! Every message is one JSON object on one line with a `type` field. The
//! server speaks first with `hello`; afterwards each client request gets
//! exactly one response line, except `close`, which ends the session.
//!
//! [`Environment`]: crate::env::Environment

pub mod client;
pub mod server;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use client::RemoteEnv;
pub use server::{serve_session, Server, SessionEnd};

pub const PROTOCOL_VERSION: u32 = 1;
pub const DEFAULT_PORT: u16 = 9090;

/// Longest accepted request line, bytes.
pub const MAX_LINE: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireInfo {
    pub cte: f64,
    pub laps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WireMessage {
    Reset {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Step {
        action: usize,
    },
    Close,
    Obs {
        frame_b64: String,
        shape: [usize; 3],
        reward: f64,
        done: bool,
        info: WireInfo,
    },
    Error {
        code: String,
        message: String,
    },
    Hello {
        protocol_version: u32,
        action_count: usize,
        obs_shape: [usize; 3],
    },
}

/// Protocol-level failure, carried to the peer as an `error` message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireError {
    pub code: ErrorCode,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    BadJson,
    BadType,
    BadField,
    BadState,
    Internal,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BadJson => "bad_json",
            Self::BadType => "bad_type",
            Self::BadField => "bad_field",
            Self::BadState => "bad_state",
            Self::Internal => "internal",
        }
    }
}

impl WireError {
    pub fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn to_message(&self) -> WireMessage {
        WireMessage::Error { code: self.code.as_str().into(), message: self.message.clone() }
    }
}

impl std::fmt::Display for WireError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.code.as_str(), self.message)
    }
}

impl std::error::Error for WireError {}

const KNOWN_TYPES: [&str; 6] = ["reset", "step", "close", "obs", "error", "hello"];

impl WireMessage {
    pub fn obs(frame: &[u8], shape: [usize; 3], reward: f64, done: bool, info: WireInfo) -> Self {
        Self::Obs { frame_b64: STANDARD.encode(frame), shape, reward, done, info }
    }

    /// Decoded observation bytes of an `obs` message.
    pub fn frame_bytes(&self) -> Option<Vec<u8>> {
        match self {
            Self::Obs { frame_b64, .. } => STANDARD.decode(frame_b64).ok(),
            _ => None,
        }
    }
}

/// One JSON line, newline included.
pub fn encode_message(msg: &WireMessage) -> String {
    let mut line = serde_json::to_string(msg).expect("wire messages always serialize");
    line.push('\n');
    line
}

pub fn decode_message(line: &str) -> Result<WireMessage, WireError> {
    let value: Value = serde_json::from_str(line.trim_end_matches(['\r', '\n']))
        .map_err(|e| WireError::new(ErrorCode::BadJson, e.to_string()))?;
    let Value::Object(map) = &value else {
        return Err(WireError::new(ErrorCode::BadJson, "message is not a JSON object"));
    };
    match map.get("type") {
        Some(Value::String(t)) if KNOWN_TYPES.contains(&t.as_str()) => {}
        Some(Value::String(t)) => return Err(WireError::new(ErrorCode::BadType, format!("unknown type {t:?}"))),
        _ => return Err(WireError::new(ErrorCode::BadType, "missing string field \"type\"")),
    }
    let msg: WireMessage =
        serde_json::from_value(value).map_err(|e| WireError::new(ErrorCode::BadField, e.to_string()))?;
    if let WireMessage::Obs { frame_b64, shape, .. } = &msg {
        let bytes = STANDARD
            .decode(frame_b64)
            .map_err(|e| WireError::new(ErrorCode::BadField, format!("frame_b64: {e}")))?;
        let expected: usize = shape.iter().product();
        if bytes.len() != expected {
            return Err(WireError::new(
                ErrorCode::BadField,
                format!("frame has {} bytes, shape {shape:?} needs {expected}", bytes.len()),
            ));
        }
    }
    Ok(msg)
}
