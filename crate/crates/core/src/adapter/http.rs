use std::time::{Duration, Instant};

use serde_json::json;

use super::{extract_identity, AdapterError, IdentitySource, InvocationAdapter, InvocationResponse};
use crate::lifecycle::{Millis, Workload};

/// Longer than the 15 s execution timeout the probe functions are deployed
/// with, so a platform-side timeout arrives as a failed response.
pub const DEFAULT_REQUEST_TIMEOUT: Duration = Duration::from_secs(20);

pub const DEFAULT_FIB_N: u32 = 38;

#[derive(Debug, Clone)]
pub struct HttpAdapterConfig {
    pub url: String,
    pub identity_source: IdentitySource,
    pub fib_n: u32,
    pub timeout: Duration,
}

impl HttpAdapterConfig {
    pub fn new(url: impl Into<String>, identity_source: IdentitySource) -> Self {
        HttpAdapterConfig { url: url.into(), identity_source, fib_n: DEFAULT_FIB_N, timeout: DEFAULT_REQUEST_TIMEOUT }
    }
}

/// POSTs `{"workload": "fib"|"hello", "n": ...}` to a deployed probe function.
pub struct HttpAdapter {
    agent: ureq::Agent,
    config: HttpAdapterConfig,
}

impl HttpAdapter {
    pub fn new(config: HttpAdapterConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpAdapter { agent, config }
    }

    fn request_body(&self, workload: Workload) -> String {
        match workload {
            Workload::Fibonacci => json!({"workload": "fib", "n": self.config.fib_n}),
            Workload::HelloWorld => json!({"workload": "hello"}),
        }
        .to_string()
    }
}

fn transport_error(err: ureq::Error) -> AdapterError {
    let retryable = matches!(
        err,
        ureq::Error::Io(_)
            | ureq::Error::Timeout(_)
            | ureq::Error::ConnectionFailed
            | ureq::Error::HostNotFound
            | ureq::Error::Protocol(_)
            | ureq::Error::BodyStalled
    );
    AdapterError::InvocationFailed { retryable, status: None, message: err.to_string() }
}

impl InvocationAdapter for HttpAdapter {
    fn invoke(&mut self, workload: Workload, _at: Millis) -> Result<InvocationResponse, AdapterError> {
        let body = self.request_body(workload);
        let started = Instant::now();
        let mut resp = self
            .agent
            .post(&self.config.url)
            .header("content-type", "application/json")
            .send(body)
            .map_err(transport_error)?;
        let raw_body = resp.body_mut().read_to_vec().map_err(transport_error)?;
        let latency = Millis::new(started.elapsed().as_millis() as u64);

        let status = resp.status().as_u16();
        if !resp.status().is_success() {
            return Err(AdapterError::InvocationFailed {
                retryable: status >= 500 || status == 429,
                status: Some(status),
                message: String::from_utf8_lossy(&raw_body).into_owned(),
            });
        }

        let headers: Vec<(String, String)> = resp
            .headers()
            .iter()
            .filter_map(|(k, v)| v.to_str().ok().map(|v| (k.as_str().to_string(), v.to_string())))
            .collect();
        let extracted = extract_identity(&raw_body, &headers, &self.config.identity_source)?;
        Ok(InvocationResponse {
            identity: extracted.identity,
            created_this_call: extracted.created,
            latency,
            raw_body,
            status,
        })
    }
}
