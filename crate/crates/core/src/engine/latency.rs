use serde::{Deserialize, Serialize};

use super::{EngineError, Prober};
use crate::adapter::InvocationAdapter;
use crate::clock::Clock;
use crate::lifecycle::{InstanceIdentity, Millis, StartKind, Workload};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadLatency {
    pub workload: Workload,
    pub cold_mean_ms: f64,
    pub warm_mean_ms: f64,
    pub cold_samples: usize,
    pub warm_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub repetitions: u32,
    pub cooldown: Millis,
    pub workloads: Vec<WorkloadLatency>,
}

impl LatencySummary {
    pub fn get(&self, workload: Workload) -> Option<&WorkloadLatency> {
        self.workloads.iter().find(|w| w.workload == workload)
    }
}

fn mean(samples: &[Millis]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|m| m.as_millis() as f64).sum::<f64>() / samples.len() as f64
}

impl<A: InvocationAdapter, C: Clock> Prober<A, C> {
    /// For each workload and repetition: wait `cooldown`, take a cold sample,
    /// then a warm sample right after the cold response.
    pub fn measure_latency(
        &mut self,
        workloads: &[Workload],
        repetitions: u32,
        cooldown: Millis,
    ) -> Result<LatencySummary, EngineError> {
        if repetitions < 3 {
            return Err(EngineError::InvalidConfig("latency campaign needs at least 3 repetitions".into()));
        }
        if cooldown == Millis::ZERO {
            return Err(EngineError::InvalidConfig("cooldown must be positive".into()));
        }
        let mut out = Vec::with_capacity(workloads.len());
        for &workload in workloads {
            let campaign = format!("latency/{workload}");
            let mut cold = Vec::new();
            let mut warm = Vec::new();
            let mut last_identity: Option<InstanceIdentity> = None;
            for repetition in 0..repetitions {
                let at = self.clock.now() + cooldown;
                let first = self.probe_once(&campaign, at, workload, last_identity.as_ref())?;
                if first.start_kind == StartKind::Warm {
                    return Err(EngineError::StalePlatformAssumption { workload, repetition });
                }
                cold.push(first.latency);

                let at = self.clock.now();
                let second = self.probe_once(&campaign, at, workload, Some(&first.identity))?;
                if second.start_kind == StartKind::Warm {
                    warm.push(second.latency);
                }
                last_identity = Some(second.identity);
            }
            out.push(WorkloadLatency {
                workload,
                cold_mean_ms: mean(&cold),
                warm_mean_ms: mean(&warm),
                cold_samples: cold.len(),
                warm_samples: warm.len(),
            });
        }
        Ok(LatencySummary { repetitions, cooldown, workloads: out })
    }
}
