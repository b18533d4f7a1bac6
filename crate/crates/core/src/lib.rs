//! Black-box measurement of FaaS instance lifecycles.
//!
//! The crate measures how long a platform keeps an idle function instance
//! alive, how long polling can keep one alive, and cold/warm response times.
//! Campaigns run against either a deployed HTTP function or an in-process
//! lifecycle simulator driven by a virtual clock.

pub mod adapter;
pub mod clock;
pub mod engine;
pub mod lifecycle;
pub mod report;
pub mod simulator;

pub use adapter::{IdentitySource, InvocationAdapter, InvocationResponse};
pub use clock::{Clock, VirtualClock, WallClock};
pub use engine::{
    compare_checkpoints, CampaignReport, DiffReport, EngineError, IdleTimeoutEstimate, KeepAliveResult, Prober,
    SearchConfig,
};
pub use lifecycle::{
    classify_start, nearest_rank_percentile, summarize_lifetimes, InstanceIdentity, InvocationRecord, LifetimeSample,
    Millis, ProviderPolicy, RecycleRule, StartKind, Workload,
};
pub use simulator::{run_trace, Simulator};
