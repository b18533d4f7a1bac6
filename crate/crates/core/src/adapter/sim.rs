use serde_json::json;

use super::{AdapterError, InvocationAdapter, InvocationResponse};
use crate::lifecycle::{Millis, StartKind, Workload};
use crate::simulator::Simulator;

/// Drives an in-process [`Simulator`]; `at` is the request arrival time.
pub struct SimAdapter {
    sim: Simulator,
}

impl SimAdapter {
    pub fn new(sim: Simulator) -> Self {
        SimAdapter { sim }
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }
}

impl InvocationAdapter for SimAdapter {
    fn invoke(&mut self, workload: Workload, at: Millis) -> Result<InvocationResponse, AdapterError> {
        let rec = self.sim.invoke(at, workload)?;
        let created = rec.start_kind == StartKind::Cold;
        let body = json!({
            "uuid": rec.identity.as_str(),
            "created": created,
            "workload": workload.as_str(),
        });
        Ok(InvocationResponse {
            identity: rec.identity,
            created_this_call: Some(created),
            latency: rec.latency,
            raw_body: body.to_string().into_bytes(),
            status: 200,
        })
    }
}
