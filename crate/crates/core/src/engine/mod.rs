//! Measurement campaigns against any [`InvocationAdapter`].
//!
//! All campaigns are strictly sequential: one request in flight, each sent at
//! an absolute target time on the injected clock. Retries reuse the current
//! slot and never move later slots.

mod checkpoint;
mod keepalive;
mod latency;
mod search;

pub use checkpoint::{
    compare_checkpoints, CampaignReport, Change, DiffError, DiffReport, DiffRow, KeepAliveRow, ReportedError,
};
pub use keepalive::{KeepAliveResult, DEFAULT_MIN_GENERATIONS};
pub use latency::{LatencySummary, WorkloadLatency};
pub use search::{IdleTimeoutEstimate, SearchConfig};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adapter::{AdapterError, InvocationAdapter};
use crate::clock::Clock;
use crate::lifecycle::{classify_start, InstanceIdentity, InvocationRecord, Millis, StartKind, Workload};

pub const DEFAULT_RETRY_LIMIT: u32 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid campaign configuration: {0}")]
    InvalidConfig(String),
    #[error("warm start already observed at the upper bound interval {}; raise the upper bound", .at_upper_bound.interval)]
    UpperBoundTooLow { at_upper_bound: Box<CampaignSummary> },
    #[error("no warm start observed down to the smallest interval {smallest_interval}")]
    IdleTimeoutBelowStep { smallest_interval: Millis },
    #[error("confirmation runs disagree: {} warm fraction {:.3}, {} warm after first: {}", .at_x.interval, .at_x.warm_fraction(), .at_x_plus_1.interval, .at_x_plus_1.warm_after_first)]
    InconsistentPlatform { at_x: Box<CampaignSummary>, at_x_plus_1: Box<CampaignSummary> },
    #[error("no instance recycle observed polling every {polling_interval} for {observed_for}")]
    NoRecycleObserved { polling_interval: Millis, observed_for: Millis },
    #[error("{workload} request after cooldown was served warm (repetition {repetition}); idle timeout estimate is outdated")]
    StalePlatformAssumption { workload: Workload, repetition: u32 },
    #[error(transparent)]
    Adapter(#[from] AdapterError),
}

impl EngineError {
    /// Stable machine-readable code for reports.
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::InvalidConfig(_) => "invalid_config",
            EngineError::UpperBoundTooLow { .. } => "upper_bound_too_low",
            EngineError::IdleTimeoutBelowStep { .. } => "idle_timeout_below_step",
            EngineError::InconsistentPlatform { .. } => "inconsistent_platform",
            EngineError::NoRecycleObserved { .. } => "no_recycle_observed",
            EngineError::StalePlatformAssumption { .. } => "stale_platform_assumption",
            EngineError::Adapter(AdapterError::IdentityUnavailable { .. }) => "identity_unavailable",
            EngineError::Adapter(_) => "invocation_failed",
        }
    }
}

/// Counts from one fixed-interval campaign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub campaign: String,
    pub interval: Millis,
    pub invocations: usize,
    pub warm: usize,
    pub cold: usize,
    /// Warm responses excluding the first record.
    pub warm_after_first: usize,
    /// Records that count towards the warm fraction: everything except the
    /// first record and cold starts that directly follow a warm start (those
    /// are cap-driven recycles, not idle expiry).
    pub eligible: usize,
    pub eligible_warm: usize,
}

impl CampaignSummary {
    pub fn from_records(campaign: &str, interval: Millis, records: &[InvocationRecord]) -> Self {
        let count = |k: StartKind| records.iter().filter(|r| r.start_kind == k).count();
        let mut eligible = 0;
        let mut eligible_warm = 0;
        for pair in records.windows(2) {
            let (prev, cur) = (&pair[0], &pair[1]);
            if cur.start_kind == StartKind::Cold && prev.start_kind == StartKind::Warm {
                continue;
            }
            eligible += 1;
            if cur.start_kind == StartKind::Warm {
                eligible_warm += 1;
            }
        }
        CampaignSummary {
            campaign: campaign.to_string(),
            interval,
            invocations: records.len(),
            warm: count(StartKind::Warm),
            cold: count(StartKind::Cold),
            warm_after_first: records.iter().skip(1).filter(|r| r.start_kind == StartKind::Warm).count(),
            eligible,
            eligible_warm,
        }
    }

    pub fn warm_fraction(&self) -> f64 {
        if self.eligible == 0 {
            0.0
        } else {
            self.eligible_warm as f64 / self.eligible as f64
        }
    }
}

/// Runs campaigns against one target on one clock, keeping every
/// observation for later persistence.
pub struct Prober<A, C> {
    adapter: A,
    clock: C,
    retry_limit: u32,
    workload: Workload,
    sequence_no: u64,
    records: Vec<InvocationRecord>,
}

impl<A: InvocationAdapter, C: Clock> Prober<A, C> {
    pub fn new(adapter: A, clock: C) -> Self {
        Prober {
            adapter,
            clock,
            retry_limit: DEFAULT_RETRY_LIMIT,
            workload: Workload::Fibonacci,
            sequence_no: 0,
            records: Vec::new(),
        }
    }

    pub fn with_retry_limit(mut self, limit: u32) -> Self {
        self.retry_limit = limit;
        self
    }

    /// Workload used by the idle-timeout search and keep-alive campaigns.
    pub fn with_workload(mut self, workload: Workload) -> Self {
        self.workload = workload;
        self
    }

    pub fn records(&self) -> &[InvocationRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<InvocationRecord> {
        self.records
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }

    pub fn adapter(&self) -> &A {
        &self.adapter
    }

    /// First slot of a new campaign: `lead` after the previous request, so
    /// the gap into a campaign matches its own spacing.
    fn campaign_start(&self, lead: Millis) -> Millis {
        match self.records.last() {
            Some(last) => (last.sent_at + lead).max(self.clock.now()),
            None => self.clock.now(),
        }
    }

    /// Sends one request at `scheduled_at` and classifies the response
    /// against `previous`.
    fn probe_once(
        &mut self,
        campaign: &str,
        scheduled_at: Millis,
        workload: Workload,
        previous: Option<&InstanceIdentity>,
    ) -> Result<InvocationRecord, EngineError> {
        self.clock.wait_until(scheduled_at);
        let mut retries = 0;
        let (sent_at, resp) = loop {
            let sent_at = self.clock.now();
            match self.adapter.invoke(workload, sent_at) {
                Ok(resp) => break (sent_at, resp),
                Err(e) if e.is_retryable() && retries < self.retry_limit => retries += 1,
                Err(e) => return Err(e.into()),
            }
        };
        // the single in-flight request occupies the target until it returns
        self.clock.wait_until(sent_at + resp.latency);
        self.sequence_no += 1;
        let record = InvocationRecord {
            campaign: campaign.to_string(),
            sequence_no: self.sequence_no,
            scheduled_at,
            sent_at,
            latency: resp.latency,
            start_kind: classify_start(previous, &resp.identity, resp.created_this_call),
            identity: resp.identity,
            workload,
            retries,
        };
        self.records.push(record.clone());
        Ok(record)
    }

    /// Invokes every `interval` for `duration` (inclusive of both ends).
    fn fixed_interval_campaign(
        &mut self,
        campaign: &str,
        interval: Millis,
        duration: Millis,
    ) -> Result<Vec<InvocationRecord>, EngineError> {
        let start = self.campaign_start(interval);
        let slots = duration.as_millis() / interval.as_millis().max(1) + 1;
        let mut out: Vec<InvocationRecord> = Vec::with_capacity(slots as usize);
        for k in 0..slots {
            let previous = out.last().map(|r| r.identity.clone());
            let rec =
                self.probe_once(campaign, start + interval.saturating_mul(k), self.workload, previous.as_ref())?;
            out.push(rec);
        }
        Ok(out)
    }
}
