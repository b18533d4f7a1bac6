//! Keep-alive lifetime measurement.
//!
//! A lifetime runs from the first response an instance serves to its last
//! warm response. An instance that was already alive when the campaign
//! started has an unknown start and is not sampled; neither is the instance
//! still alive when the campaign ends.

use serde::{Deserialize, Serialize};

use super::{EngineError, Prober};
use crate::adapter::InvocationAdapter;
use crate::clock::Clock;
use crate::lifecycle::{summarize_lifetimes, InstanceIdentity, LifetimeSample, Millis, StartKind};

pub const DEFAULT_MIN_GENERATIONS: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeepAliveResult {
    pub polling_interval: Millis,
    pub samples: Vec<LifetimeSample>,
    pub max: Millis,
    pub p90: Millis,
}

struct OpenGeneration {
    identity: InstanceIdentity,
    first_at: Millis,
    last_warm_at: Millis,
    /// Created during this campaign, so its start is known.
    sampled: bool,
}

impl OpenGeneration {
    fn close(self) -> Option<LifetimeSample> {
        self.sampled.then_some(LifetimeSample {
            first_warm_at: self.first_at,
            last_warm_at: self.last_warm_at,
            identity: self.identity,
        })
    }
}

impl<A: InvocationAdapter, C: Clock> Prober<A, C> {
    /// Polls every `polling_interval` until `min_generations` complete
    /// lifetimes are observed or `max_duration` elapses, whichever is first.
    pub fn measure_keepalive(
        &mut self,
        polling_interval: Millis,
        max_duration: Millis,
        min_generations: usize,
    ) -> Result<KeepAliveResult, EngineError> {
        if polling_interval == Millis::ZERO {
            return Err(EngineError::InvalidConfig("polling interval must be positive".into()));
        }
        if min_generations == 0 {
            return Err(EngineError::InvalidConfig("min_generations must be at least 1".into()));
        }
        let campaign = format!("keepalive@{polling_interval}");
        let start = self.campaign_start(polling_interval);
        let mut samples = Vec::new();
        let mut open: Option<OpenGeneration> = None;
        let mut elapsed = Millis::ZERO;

        while elapsed <= max_duration && samples.len() < min_generations {
            let previous = open.as_ref().map(|g| g.identity.clone());
            let rec = self.probe_once(&campaign, start + elapsed, self.workload, previous.as_ref())?;
            let continues = match &mut open {
                Some(g) if g.identity == rec.identity && rec.start_kind != StartKind::Cold => {
                    g.last_warm_at = rec.sent_at;
                    true
                }
                _ => false,
            };
            if !continues {
                if let Some(sample) = open.take().and_then(OpenGeneration::close) {
                    samples.push(sample);
                }
                open = Some(OpenGeneration {
                    identity: rec.identity,
                    first_at: rec.sent_at,
                    last_warm_at: rec.sent_at,
                    sampled: rec.start_kind == StartKind::Cold,
                });
            }
            elapsed = elapsed + polling_interval;
        }

        let summary = summarize_lifetimes(&samples).map_err(|_| EngineError::NoRecycleObserved {
            polling_interval,
            observed_for: elapsed - polling_interval,
        })?;
        Ok(KeepAliveResult { polling_interval, samples, max: summary.max, p90: summary.p90 })
    }
}
