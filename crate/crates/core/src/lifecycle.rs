//! Shared domain types for lifecycle measurement: durations, instance
//! identities, invocation records, provider policies and the small set of
//! statistics the reports need.

use std::fmt;
use std::ops::{Add, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest representable duration. Arithmetic saturates here instead of wrapping.
pub const MAX_MILLIS: u64 = i64::MAX as u64;

const MS_PER_MINUTE: u64 = 60_000;

/// A non-negative time quantity in whole milliseconds.
///
/// Campaign times are stored relative to the start of a probe session, so
/// the same type is used for both instants and spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Millis(u64);

impl Millis {
    pub const ZERO: Millis = Millis(0);
    pub const MAX: Millis = Millis(MAX_MILLIS);

    pub const fn new(ms: u64) -> Self {
        if ms > MAX_MILLIS {
            Millis(MAX_MILLIS)
        } else {
            Millis(ms)
        }
    }

    pub const fn from_secs(s: u64) -> Self {
        Self::new(s.saturating_mul(1000))
    }

    pub const fn from_minutes(m: u64) -> Self {
        Self::new(m.saturating_mul(MS_PER_MINUTE))
    }

    pub const fn from_hours(h: u64) -> Self {
        Self::from_minutes(h.saturating_mul(60))
    }

    /// Converts fractional minutes, rounding to the nearest millisecond.
    /// Negative and NaN inputs map to zero.
    pub fn from_minutes_f64(m: f64) -> Self {
        if m.is_nan() || m <= 0.0 {
            return Millis::ZERO;
        }
        let ms = (m * MS_PER_MINUTE as f64).round();
        if ms >= MAX_MILLIS as f64 {
            Millis::MAX
        } else {
            Millis(ms as u64)
        }
    }

    pub const fn as_millis(self) -> u64 {
        self.0
    }

    /// Whole minutes, rounded down.
    pub const fn whole_minutes(self) -> u64 {
        self.0 / MS_PER_MINUTE
    }

    pub fn as_minutes_f64(self) -> f64 {
        self.0 as f64 / MS_PER_MINUTE as f64
    }

    pub fn as_std(self) -> std::time::Duration {
        std::time::Duration::from_millis(self.0)
    }

    pub const fn saturating_add(self, rhs: Millis) -> Millis {
        Millis::new(self.0.saturating_add(rhs.0))
    }

    /// Difference clamped at zero.
    pub const fn saturating_sub(self, rhs: Millis) -> Millis {
        Millis(self.0.saturating_sub(rhs.0))
    }

    pub const fn saturating_mul(self, k: u64) -> Millis {
        Millis::new(self.0.saturating_mul(k))
    }

    pub fn checked_sub(self, rhs: Millis) -> Option<Millis> {
        self.0.checked_sub(rhs.0).map(Millis)
    }
}

impl Add for Millis {
    type Output = Millis;

    fn add(self, rhs: Millis) -> Millis {
        self.saturating_add(rhs)
    }
}

impl Sub for Millis {
    type Output = Millis;

    fn sub(self, rhs: Millis) -> Millis {
        self.saturating_sub(rhs)
    }
}

impl fmt::Display for Millis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(MS_PER_MINUTE) {
            write!(f, "{}min", self.0 / MS_PER_MINUTE)
        } else {
            write!(f, "{}ms", self.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LifecycleError {
    #[error("no samples to summarize")]
    EmptySamples,
    #[error("percentile {0} outside [1, 100]")]
    PercentileOutOfRange(u32),
    #[error("instance identity must not be empty")]
    EmptyIdentity,
    #[error("invalid provider policy: {0}")]
    InvalidPolicy(String),
}

/// Opaque token that distinguishes one function instance from another
/// (a log stream name, a platform dimension, or a self-generated UUID).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct InstanceIdentity(String);

impl InstanceIdentity {
    pub fn new(id: impl Into<String>) -> Result<Self, LifecycleError> {
        let id = id.into();
        if id.is_empty() {
            return Err(LifecycleError::EmptyIdentity);
        }
        Ok(InstanceIdentity(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for InstanceIdentity {
    type Error = LifecycleError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        InstanceIdentity::new(value)
    }
}

impl From<InstanceIdentity> for String {
    fn from(id: InstanceIdentity) -> String {
        id.0
    }
}

impl fmt::Display for InstanceIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartKind {
    Cold,
    Warm,
    Unknown,
}

/// The two probe functions: a recursive Fibonacci CPU workload and a
/// hello-world function that does no work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub enum Workload {
    #[default]
    #[serde(rename = "fib")]
    Fibonacci,
    #[serde(rename = "hello")]
    HelloWorld,
}

impl Workload {
    pub const ALL: [Workload; 2] = [Workload::Fibonacci, Workload::HelloWorld];

    pub fn as_str(self) -> &'static str {
        match self {
            Workload::Fibonacci => "fib",
            Workload::HelloWorld => "hello",
        }
    }
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One probe observation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvocationRecord {
    pub campaign: String,
    pub sequence_no: u64,
    pub scheduled_at: Millis,
    pub sent_at: Millis,
    pub latency: Millis,
    pub identity: InstanceIdentity,
    pub start_kind: StartKind,
    pub workload: Workload,
    /// Retries spent on this slot before a response was obtained.
    #[serde(default)]
    pub retries: u32,
}

impl InvocationRecord {
    /// Scheduling skew; zero on the virtual clock.
    pub fn skew(&self) -> Millis {
        self.sent_at - self.scheduled_at
    }
}

/// How a platform decides the maximum total lifetime of a new instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RecycleRule {
    /// Every instance gets the same cap.
    StaticCap { cap: Millis },
    /// Instances cycle through a list of observed lifetimes, starting at an
    /// offset derived from the simulator seed.
    EmpiricalCap { lifetimes: Vec<Millis> },
    /// The cap depends on the inter-arrival gap observed when the instance is
    /// created. Ranges are inclusive on both ends.
    PatternCap { rules: Vec<PatternRule>, default_cap: Millis },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternRule {
    pub interval_low: Millis,
    pub interval_high: Millis,
    pub cap: Millis,
}

impl RecycleRule {
    fn validate(&self) -> Result<(), String> {
        match self {
            RecycleRule::StaticCap { cap } => {
                if *cap == Millis::ZERO {
                    return Err("static cap must be positive".into());
                }
            }
            RecycleRule::EmpiricalCap { lifetimes } => {
                if lifetimes.is_empty() {
                    return Err("empirical cap needs at least one lifetime".into());
                }
                if lifetimes.contains(&Millis::ZERO) {
                    return Err("empirical lifetimes must be positive".into());
                }
            }
            RecycleRule::PatternCap { rules, default_cap } => {
                if *default_cap == Millis::ZERO {
                    return Err("default cap must be positive".into());
                }
                let mut prev_high: Option<Millis> = None;
                for r in rules {
                    if r.cap == Millis::ZERO {
                        return Err("pattern caps must be positive".into());
                    }
                    if r.interval_low > r.interval_high {
                        return Err(format!("pattern range [{}, {}] is inverted", r.interval_low, r.interval_high));
                    }
                    if let Some(high) = prev_high {
                        if r.interval_low <= high {
                            return Err("pattern ranges must be ordered and non-overlapping".into());
                        }
                    }
                    prev_high = Some(r.interval_high);
                }
            }
        }
        Ok(())
    }
}

/// Mean cold/warm response time of one workload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyPair {
    pub cold: Millis,
    pub warm: Millis,
}

/// Response-time model: per-workload means plus a uniform jitter half-width.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencyModel {
    pub fib: LatencyPair,
    pub hello: LatencyPair,
    pub jitter: Millis,
}

impl LatencyModel {
    pub fn pair(&self, workload: Workload) -> LatencyPair {
        match workload {
            Workload::Fibonacci => self.fib,
            Workload::HelloWorld => self.hello,
        }
    }

    pub fn mean(&self, workload: Workload, kind: StartKind) -> Millis {
        let pair = self.pair(workload);
        match kind {
            StartKind::Cold => pair.cold,
            _ => pair.warm,
        }
    }
}

/// Lifecycle rules of a (simulated) platform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderPolicy {
    pub name: String,
    pub idle_timeout: Millis,
    pub recycle_rule: RecycleRule,
    pub latency: LatencyModel,
}

impl ProviderPolicy {
    pub fn validate(&self) -> Result<(), LifecycleError> {
        let bad = |msg: String| Err(LifecycleError::InvalidPolicy(format!("{}: {msg}", self.name)));
        if self.idle_timeout == Millis::ZERO {
            return bad("idle timeout must be positive".into());
        }
        if let Err(msg) = self.recycle_rule.validate() {
            return bad(msg);
        }
        for w in Workload::ALL {
            let pair = self.latency.pair(w);
            for mean in [pair.cold, pair.warm] {
                if mean == Millis::ZERO {
                    return bad(format!("{w} latency means must be positive"));
                }
                if self.latency.jitter >= mean {
                    return bad(format!("jitter {} must be below every mean ({w}: {mean})", self.latency.jitter));
                }
            }
        }
        Ok(())
    }
}

/// The span during which one instance was observed serving keep-alive polls.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifetimeSample {
    pub first_warm_at: Millis,
    pub last_warm_at: Millis,
    pub identity: InstanceIdentity,
}

impl LifetimeSample {
    pub fn lifetime(&self) -> Millis {
        self.last_warm_at - self.first_warm_at
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifetimeSummary {
    pub max: Millis,
    pub p90: Millis,
    pub count: usize,
}

/// Classifies a response as a cold or warm start.
///
/// An adapter-reported creation flag wins; otherwise a response is warm iff
/// the same instance served the previous request.
pub fn classify_start(
    previous: Option<&InstanceIdentity>,
    current: &InstanceIdentity,
    adapter_cold_flag: Option<bool>,
) -> StartKind {
    match (adapter_cold_flag, previous) {
        (Some(true), _) => StartKind::Cold,
        (Some(false), _) => StartKind::Warm,
        (None, Some(prev)) if prev == current => StartKind::Warm,
        (None, Some(_)) => StartKind::Cold,
        (None, None) => StartKind::Unknown,
    }
}

/// Nearest-rank percentile: the element at 1-based rank `ceil(p/100 * n)` of
/// the sorted samples. The result is always one of the inputs.
pub fn nearest_rank_percentile(samples: &[Millis], p: u32) -> Result<Millis, LifecycleError> {
    if samples.is_empty() {
        return Err(LifecycleError::EmptySamples);
    }
    if !(1..=100).contains(&p) {
        return Err(LifecycleError::PercentileOutOfRange(p));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    // ceil(p * n / 100) in integer arithmetic
    let rank = (p as usize * n).div_ceil(100).max(1);
    Ok(sorted[rank - 1])
}

pub fn summarize_lifetimes(samples: &[LifetimeSample]) -> Result<LifetimeSummary, LifecycleError> {
    let lifetimes: Vec<Millis> = samples.iter().map(LifetimeSample::lifetime).collect();
    let max = lifetimes.iter().copied().max().ok_or(LifecycleError::EmptySamples)?;
    let p90 = nearest_rank_percentile(&lifetimes, 90)?;
    Ok(LifetimeSummary { max, p90, count: lifetimes.len() })
}
