//! Uniform invocation interface over probe targets.

mod http;
mod sim;

pub use http::{HttpAdapter, HttpAdapterConfig, DEFAULT_FIB_N, DEFAULT_REQUEST_TIMEOUT};
pub use sim::SimAdapter;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::lifecycle::{InstanceIdentity, Millis, Workload};
use crate::simulator::SimError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvocationResponse {
    pub identity: InstanceIdentity,
    /// Whether the target reports having created the instance for this call.
    pub created_this_call: Option<bool>,
    pub latency: Millis,
    pub raw_body: Vec<u8>,
    pub status: u16,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdapterError {
    #[error("invocation failed (status {status:?}, retryable: {retryable}): {message}")]
    InvocationFailed { retryable: bool, status: Option<u16>, message: String },
    #[error("instance identity unavailable: {reason}")]
    IdentityUnavailable { reason: String, raw_body: String },
    #[error(transparent)]
    Simulator(#[from] SimError),
}

impl AdapterError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, AdapterError::InvocationFailed { retryable: true, .. })
    }
}

/// Where the instance fingerprint lives in a response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IdentitySource {
    /// A JSON pointer into the response body, e.g. `/ctx/logStreamName`.
    BodyField { json_pointer: String },
    /// A response header, matched case-insensitively.
    Header { name: String },
    /// The probe handler contract: `{"uuid": ..., "created": ...}`.
    SelfUuid,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedIdentity {
    pub identity: InstanceIdentity,
    pub created: Option<bool>,
}

fn unavailable(reason: impl Into<String>, body: &[u8]) -> AdapterError {
    AdapterError::IdentityUnavailable { reason: reason.into(), raw_body: String::from_utf8_lossy(body).into_owned() }
}

fn non_empty(token: &str, body: &[u8]) -> Result<InstanceIdentity, AdapterError> {
    InstanceIdentity::new(token).map_err(|_| unavailable("identity token is empty", body))
}

pub fn extract_identity(
    body: &[u8],
    headers: &[(String, String)],
    source: &IdentitySource,
) -> Result<ExtractedIdentity, AdapterError> {
    match source {
        IdentitySource::Header { name } => {
            let value = headers
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case(name))
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| unavailable(format!("header {name} missing"), body))?;
            Ok(ExtractedIdentity { identity: non_empty(value, body)?, created: None })
        }
        IdentitySource::BodyField { json_pointer } => {
            let doc: Value =
                serde_json::from_slice(body).map_err(|e| unavailable(format!("body is not JSON: {e}"), body))?;
            let token = match doc.pointer(json_pointer) {
                Some(Value::String(s)) => s.clone(),
                Some(Value::Number(n)) => n.to_string(),
                Some(_) => return Err(unavailable(format!("{json_pointer} is not a string"), body)),
                None => return Err(unavailable(format!("{json_pointer} not found"), body)),
            };
            Ok(ExtractedIdentity { identity: non_empty(&token, body)?, created: None })
        }
        IdentitySource::SelfUuid => {
            let doc: Value =
                serde_json::from_slice(body).map_err(|e| unavailable(format!("body is not JSON: {e}"), body))?;
            let uuid =
                doc.get("uuid").and_then(Value::as_str).ok_or_else(|| unavailable("uuid field missing", body))?;
            let created = doc.get("created").and_then(Value::as_bool);
            Ok(ExtractedIdentity { identity: non_empty(uuid, body)?, created })
        }
    }
}

/// A probe target. Implementations serve one campaign at a time.
pub trait InvocationAdapter: Send {
    /// Invokes the target once. `at` is the session-relative send time; the
    /// simulator uses it as the arrival time, HTTP targets ignore it.
    fn invoke(&mut self, workload: Workload, at: Millis) -> Result<InvocationResponse, AdapterError>;
}

impl<A: InvocationAdapter + ?Sized> InvocationAdapter for Box<A> {
    fn invoke(&mut self, workload: Workload, at: Millis) -> Result<InvocationResponse, AdapterError> {
        (**self).invoke(workload, at)
    }
}
