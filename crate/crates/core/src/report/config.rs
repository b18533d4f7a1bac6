//! Probe configuration file.
//!
//! Durations are written in the units operators think in (minutes, hours)
//! and may be fractional. Unknown keys are rejected. A campaign runs iff its
//! section is present.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::adapter::IdentitySource;
use crate::engine::{SearchConfig, DEFAULT_MIN_GENERATIONS, DEFAULT_RETRY_LIMIT};
use crate::lifecycle::{Millis, ProviderPolicy, Workload};
use crate::simulator::presets;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    #[default]
    Simulator,
    Http,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub kind: TargetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<ProviderPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity_source: Option<IdentitySource>,
    #[serde(default = "default_fib_n")]
    pub fib_n: u32,
    #[serde(default = "default_timeout_s")]
    pub timeout_s: f64,
    #[serde(default = "default_retries")]
    pub retries: u32,
}

fn default_fib_n() -> u32 {
    crate::adapter::DEFAULT_FIB_N
}

fn default_timeout_s() -> f64 {
    crate::adapter::DEFAULT_REQUEST_TIMEOUT.as_secs_f64()
}

fn default_retries() -> u32 {
    DEFAULT_RETRY_LIMIT
}

impl TargetConfig {
    /// The simulator policy, resolved from a preset name or an inline policy.
    pub fn resolve_policy(&self) -> Result<ProviderPolicy, ReportError> {
        match (&self.preset, &self.policy) {
            (Some(name), None) => {
                presets::preset(name).ok_or_else(|| ReportError::Config(format!("unknown preset {name:?}")))
            }
            (None, Some(policy)) => {
                policy.validate().map_err(|e| ReportError::Config(e.to_string()))?;
                Ok(policy.clone())
            }
            _ => Err(ReportError::Config("simulator target needs exactly one of preset or policy".into())),
        }
    }

    pub fn default_label(&self) -> String {
        match (&self.preset, &self.policy, &self.url) {
            (Some(p), _, _) => p.clone(),
            (_, Some(p), _) => p.name.clone(),
            _ => "target".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    #[serde(default = "d_upper")]
    pub upper_bound_min: f64,
    #[serde(default = "d_step")]
    pub step_min: f64,
    #[serde(default = "d_hours")]
    pub campaign_hours: f64,
    #[serde(default = "d_threshold")]
    pub warm_confirm_threshold: f64,
}

fn d_upper() -> f64 {
    20.0
}
fn d_step() -> f64 {
    1.0
}
fn d_hours() -> f64 {
    5.0
}
fn d_threshold() -> f64 {
    0.9
}

impl Default for SearchSection {
    fn default() -> Self {
        SearchSection {
            upper_bound_min: d_upper(),
            step_min: d_step(),
            campaign_hours: d_hours(),
            warm_confirm_threshold: d_threshold(),
        }
    }
}

impl SearchSection {
    pub fn to_search_config(&self) -> SearchConfig {
        SearchConfig {
            upper_bound: Millis::from_minutes_f64(self.upper_bound_min),
            step: Millis::from_minutes_f64(self.step_min),
            campaign_duration: Millis::from_minutes_f64(self.campaign_hours * 60.0),
            warm_confirm_threshold: self.warm_confirm_threshold,
        }
    }
}

/// One polling interval or several.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Intervals {
    One(f64),
    Many(Vec<f64>),
}

impl Intervals {
    pub fn minutes(&self) -> Vec<f64> {
        match self {
            Intervals::One(m) => vec![*m],
            Intervals::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeepaliveSection {
    /// Defaults to the estimated idle timeout when a search runs first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval_min: Option<Intervals>,
    #[serde(default = "d_max_hours")]
    pub max_hours: f64,
    #[serde(default = "d_generations")]
    pub min_generations: usize,
}

fn d_max_hours() -> f64 {
    48.0
}
fn d_generations() -> usize {
    DEFAULT_MIN_GENERATIONS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencySection {
    #[serde(default = "d_reps")]
    pub repetitions: u32,
    /// Defaults to one step above the estimated idle timeout, or one step
    /// above the search upper bound when no estimate is available.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cooldown_min: Option<f64>,
    #[serde(default = "d_workloads")]
    pub workloads: Vec<Workload>,
}

fn d_reps() -> u32 {
    10
}
fn d_workloads() -> Vec<Workload> {
    Workload::ALL.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "d_dir")]
    pub dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<String>,
    /// RFC 3339. Simulator runs default to the Unix epoch so output is
    /// reproducible; HTTP runs always use the wall clock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started_at: Option<String>,
}

fn d_dir() -> PathBuf {
    PathBuf::from("probe-out")
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: d_dir(), label: None, checkpoint: None, started_at: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    #[serde(default)]
    pub seed: u64,
    pub target: TargetConfig,
    #[serde(default = "d_workload")]
    pub workload: Workload,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keepalive: Option<KeepaliveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<LatencySection>,
    #[serde(default)]
    pub output: OutputSection,
}

fn d_workload() -> Workload {
    Workload::Fibonacci
}

fn positive(name: &str, v: f64) -> Result<(), ReportError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ReportError::Config(format!("{name} must be a positive number, got {v}")))
    }
}

impl ProbeConfig {
    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        let cfg: ProbeConfig = serde_json::from_str(text).map_err(|e| ReportError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ReportError> {
        match self.target.kind {
            TargetKind::Simulator => {
                self.target.resolve_policy()?;
                if self.target.url.is_some() || self.target.identity_source.is_some() {
                    return Err(ReportError::Config("url/identity_source apply to http targets only".into()));
                }
            }
            TargetKind::Http => {
                if self.target.url.is_none() || self.target.identity_source.is_none() {
                    return Err(ReportError::Config("http target needs url and identity_source".into()));
                }
                if self.target.preset.is_some() || self.target.policy.is_some() {
                    return Err(ReportError::Config("preset/policy apply to simulator targets only".into()));
                }
                positive("target.timeout_s", self.target.timeout_s)?;
            }
        }
        if self.search.is_none() && self.keepalive.is_none() && self.latency.is_none() {
            return Err(ReportError::Config("at least one of search, keepalive, latency is required".into()));
        }
        if let Some(s) = &self.search {
            for (name, v) in [("search.upper_bound_min", s.upper_bound_min), ("search.step_min", s.step_min)] {
                positive(name, v)?;
            }
            positive("search.campaign_hours", s.campaign_hours)?;
            s.to_search_config().validate().map_err(|e| ReportError::Config(e.to_string()))?;
        }
        if let Some(k) = &self.keepalive {
            match &k.interval_min {
                Some(iv) => {
                    let minutes = iv.minutes();
                    if minutes.is_empty() {
                        return Err(ReportError::Config("keepalive.interval_min must not be empty".into()));
                    }
                    for m in minutes {
                        positive("keepalive.interval_min", m)?;
                    }
                }
                None if self.search.is_none() => {
                    return Err(ReportError::Config("keepalive.interval_min is required without a search".into()))
                }
                None => {}
            }
            positive("keepalive.max_hours", k.max_hours)?;
            if k.min_generations == 0 {
                return Err(ReportError::Config("keepalive.min_generations must be at least 1".into()));
            }
        }
        if let Some(l) = &self.latency {
            if l.repetitions < 3 {
                return Err(ReportError::Config("latency.repetitions must be at least 3".into()));
            }
            if let Some(c) = l.cooldown_min {
                positive("latency.cooldown_min", c)?;
            }
            if l.workloads.is_empty() {
                return Err(ReportError::Config("latency.workloads must not be empty".into()));
            }
        }
        if let Some(ts) = &self.output.started_at {
            chrono::DateTime::parse_from_rfc3339(ts)
                .map_err(|e| ReportError::Config(format!("output.started_at: {e}")))?;
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        self.output.label.clone().unwrap_or_else(|| self.target.default_label())
    }

    pub fn checkpoint(&self) -> String {
        self.output.checkpoint.clone().unwrap_or_else(|| self.target.default_label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_expands_defaults() {
        let cfg = ProbeConfig::from_json(r#"{"target":{"kind":"simulator","preset":"aws-2021"},"search":{}}"#).unwrap();
        assert_eq!(cfg.search.as_ref().unwrap(), &SearchSection::default());
        assert_eq!(cfg.target.retries, 2);
        assert_eq!(cfg.label(), "aws-2021");
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"upper_bound_min\":20.0"), "{text}");
    }

    #[test]
    fn short_campaign_rejected() {
        let err = ProbeConfig::from_json(
            r#"{"target":{"kind":"simulator","preset":"aws-2021"},"search":{"campaign_hours":0.5}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("twice the upper bound"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ProbeConfig::from_json(r#"{"target":{"kind":"simulator","preset":"aws-2021"},"search":{"upper":3}}"#)
            .is_err());
        assert!(ProbeConfig::from_json(r#"{"target":{"kind":"simulator","preset":"aws-2021"},"bogus":1}"#).is_err());
    }

    #[test]
    fn target_combinations() {
        let bad = [
            r#"{"target":{"kind":"simulator"},"search":{}}"#,
            r#"{"target":{"kind":"simulator","preset":"nope"},"search":{}}"#,
            r#"{"target":{"kind":"http","url":"http://x"},"search":{}}"#,
            r#"{"target":{"kind":"simulator","preset":"aws-2021"}}"#,
            r#"{"target":{"kind":"simulator","preset":"aws-2021"},"keepalive":{}}"#,
        ];
        for text in bad {
            assert!(ProbeConfig::from_json(text).is_err(), "{text}");
        }
        ProbeConfig::from_json(
            r#"{"target":{"kind":"http","url":"http://x","identity_source":{"kind":"self_uuid"}},"latency":{"cooldown_min":13}}"#,
        )
        .unwrap();
    }

    #[test]
    fn keepalive_intervals_accept_number_or_list() {
        let one: KeepaliveSection = serde_json::from_str(r#"{"interval_min":5}"#).unwrap();
        assert_eq!(one.interval_min.unwrap().minutes(), vec![5.0]);
        let many: KeepaliveSection = serde_json::from_str(r#"{"interval_min":[5,10]}"#).unwrap();
        assert_eq!(many.interval_min.unwrap().minutes(), vec![5.0, 10.0]);
    }
}
