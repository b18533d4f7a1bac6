//! Deterministic discrete-event model of a FaaS platform's instance
//! lifecycle.
//!
//! The simulator keeps at most one live instance, since probe traffic is
//! strictly sequential. An instance is decommissioned when it has been idle
//! for longer than the policy's idle timeout or when its age exceeds the
//! recycle cap assigned at creation. Both comparisons are strict: a request
//! arriving exactly at the idle timeout, or exactly at the cap, is still
//! served warm.
//!
//! Time is supplied by the caller; nothing here reads a clock.

pub mod presets;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lifecycle::{
    InstanceIdentity, InvocationRecord, LifecycleError, Millis, ProviderPolicy, RecycleRule, StartKind, Workload,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("invocation at {at} precedes the last event at {last}")]
    TimeTravel { at: Millis, last: Millis },
    #[error("invocation times must be strictly increasing (index {index})")]
    Unsorted { index: usize },
    #[error(transparent)]
    Policy(#[from] LifecycleError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveInstance {
    pub identity: InstanceIdentity,
    pub created_at: Millis,
    pub last_served_at: Millis,
    pub assigned_cap: Millis,
}

impl LiveInstance {
    fn alive_at(&self, at: Millis, idle_timeout: Millis) -> bool {
        at - self.last_served_at <= idle_timeout && at - self.created_at <= self.assigned_cap
    }
}

/// Position in an `EmpiricalCap` lifetime list. Starts at `seed mod len` and
/// advances by one per created instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CapCursor {
    next: u64,
}

impl CapCursor {
    pub fn from_seed(seed: u64) -> Self {
        CapCursor { next: seed }
    }
}

/// Picks the recycle cap for a newly created instance.
///
/// `observed_interval` is the gap since the previous invocation; it is only
/// consulted by `PatternCap` and is absent on the very first invocation.
pub fn assign_cap(rule: &RecycleRule, observed_interval: Option<Millis>, cursor: &mut CapCursor) -> Millis {
    match rule {
        RecycleRule::StaticCap { cap } => *cap,
        RecycleRule::EmpiricalCap { lifetimes } => {
            let idx = (cursor.next % lifetimes.len() as u64) as usize;
            cursor.next = cursor.next.wrapping_add(1);
            lifetimes[idx]
        }
        RecycleRule::PatternCap { rules, default_cap } => observed_interval
            .and_then(|gap| rules.iter().find(|r| r.interval_low <= gap && gap <= r.interval_high).map(|r| r.cap))
            .unwrap_or(*default_cap),
    }
}

pub struct Simulator {
    policy: ProviderPolicy,
    seed: u64,
    rng: ChaCha8Rng,
    cursor: CapCursor,
    live: Option<LiveInstance>,
    last_event: Option<Millis>,
    instance_counter: u64,
    sequence_no: u64,
}

impl Simulator {
    pub fn new(policy: ProviderPolicy, seed: u64) -> Result<Self, SimError> {
        policy.validate()?;
        Ok(Simulator {
            policy,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            cursor: CapCursor::from_seed(seed),
            live: None,
            last_event: None,
            instance_counter: 0,
            sequence_no: 0,
        })
    }

    pub fn policy(&self) -> &ProviderPolicy {
        &self.policy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn live_instance(&self) -> Option<&LiveInstance> {
        self.live.as_ref()
    }

    pub fn instances_created(&self) -> u64 {
        self.instance_counter
    }

    /// Serves one request arriving at `at`.
    pub fn invoke(&mut self, at: Millis, workload: Workload) -> Result<InvocationRecord, SimError> {
        if let Some(last) = self.last_event {
            if at < last {
                return Err(SimError::TimeTravel { at, last });
            }
        }
        let observed_interval = self.last_event.map(|last| at - last);
        self.last_event = Some(at);

        let idle = self.policy.idle_timeout;
        let kind = match &mut self.live {
            Some(inst) if inst.alive_at(at, idle) => {
                inst.last_served_at = at;
                StartKind::Warm
            }
            _ => {
                self.instance_counter += 1;
                let assigned_cap = assign_cap(&self.policy.recycle_rule, observed_interval, &mut self.cursor);
                let identity = InstanceIdentity::new(format!("sim-{}", self.instance_counter))
                    .expect("generated identity is non-empty");
                self.live = Some(LiveInstance { identity, created_at: at, last_served_at: at, assigned_cap });
                StartKind::Cold
            }
        };

        let latency = self.sample_latency(workload, kind);
        let identity = self.live.as_ref().map(|i| i.identity.clone()).expect("instance is live after invoke");
        self.sequence_no += 1;
        Ok(InvocationRecord {
            campaign: "sim".to_string(),
            sequence_no: self.sequence_no,
            scheduled_at: at,
            sent_at: at,
            latency,
            identity,
            start_kind: kind,
            workload,
            retries: 0,
        })
    }

    fn sample_latency(&mut self, workload: Workload, kind: StartKind) -> Millis {
        let mean = self.policy.latency.mean(workload, kind).as_millis();
        let jitter = self.policy.latency.jitter.as_millis();
        // one draw per invocation keeps the stream aligned across workloads
        let offset = self.rng.random_range(0..=2 * jitter);
        Millis::new(mean + offset - jitter)
    }
}

/// Runs a whole trace of request times through a fresh simulator.
pub fn run_trace(policy: &ProviderPolicy, times: &[Millis], seed: u64) -> Result<Vec<InvocationRecord>, SimError> {
    if let Some(index) = times.windows(2).position(|w| w[1] <= w[0]) {
        return Err(SimError::Unsorted { index: index + 1 });
    }
    let mut sim = Simulator::new(policy.clone(), seed)?;
    times.iter().map(|t| sim.invoke(*t, Workload::Fibonacci)).collect()
}
