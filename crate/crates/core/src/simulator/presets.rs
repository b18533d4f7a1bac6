//! Shipped platform policies.
//!
//! Idle timeouts and keep-alive caps reproduce the measured 2020-2022 values
//! for AWS Lambda, IBM Cloud Functions and Azure Functions; latency means are
//! the measured average cold/warm response times.
//!
//! Azure's long-lived retention under 5-minute polling is modelled as a
//! 2670-minute cap (44 h 30 min). A rounded 2675 minutes is also quoted for
//! the same quantity; the preset follows the hours-and-minutes figure.

use crate::lifecycle::{LatencyModel, LatencyPair, Millis, PatternRule, ProviderPolicy, RecycleRule};

pub const PRESET_NAMES: [&str; 7] =
    ["aws-2020", "aws-2021", "ibm-2020", "ibm-2021", "azure-2020-02", "azure-2020", "azure-2021"];

const DEFAULT_JITTER_MS: u64 = 50;

fn min(m: u64) -> Millis {
    Millis::from_minutes(m)
}

fn latency(fib: (u64, u64), hello: (u64, u64)) -> LatencyModel {
    LatencyModel {
        fib: LatencyPair { cold: Millis::new(fib.0), warm: Millis::new(fib.1) },
        hello: LatencyPair { cold: Millis::new(hello.0), warm: Millis::new(hello.1) },
        jitter: Millis::new(DEFAULT_JITTER_MS),
    }
}

/// Nine copies of `usual` followed by one `outlier`.
fn ninety_ten(usual: u64, outlier: u64) -> RecycleRule {
    let mut lifetimes = vec![min(usual); 9];
    lifetimes.push(min(outlier));
    RecycleRule::EmpiricalCap { lifetimes }
}

fn aws_recycle() -> RecycleRule {
    // most instances recycled at 140 min, the longest at 145 min
    ninety_ten(140, 145)
}

fn ibm_recycle() -> RecycleRule {
    ninety_ten(138, 336)
}

fn azure_recycle() -> RecycleRule {
    // Gaps up to 5 min count as a frequent pattern; 6-12 min polling keeps an
    // instance for at most 20 min. Modelled as a cap, not an idle effect.
    RecycleRule::PatternCap {
        rules: vec![
            PatternRule { interval_low: Millis::ZERO, interval_high: min(5), cap: min(2670) },
            PatternRule { interval_low: min(5) + Millis::new(1), interval_high: min(12), cap: min(20) },
        ],
        default_cap: min(20),
    }
}

pub fn preset(name: &str) -> Option<ProviderPolicy> {
    let aws = latency((1161, 778), (698, 79));
    let ibm = latency((3169, 695), (1495, 169));
    let azure = latency((2825, 628), (2663, 81));
    let (idle, recycle_rule, latency) = match name {
        "aws-2020" => (10, aws_recycle(), aws),
        "aws-2021" => (5, aws_recycle(), aws),
        "ibm-2020" | "ibm-2021" => (10, ibm_recycle(), ibm),
        "azure-2020-02" => (20, azure_recycle(), azure),
        "azure-2020" => (14, azure_recycle(), azure),
        "azure-2021" => (12, azure_recycle(), azure),
        _ => return None,
    };
    Some(ProviderPolicy { name: name.to_string(), idle_timeout: min(idle), recycle_rule, latency })
}

pub fn all() -> Vec<ProviderPolicy> {
    PRESET_NAMES.iter().filter_map(|n| preset(n)).collect()
}
