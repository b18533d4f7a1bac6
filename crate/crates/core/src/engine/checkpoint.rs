//! Dated result bundles and the diff between them.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{IdleTimeoutEstimate, KeepAliveResult, LatencySummary};
use crate::report::ProbeConfig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportedError {
    pub campaign: String,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub target_label: String,
    /// RFC 3339.
    pub started_at: String,
    pub policy_checkpoint_label: String,
    pub tool_version: String,
    pub seed: u64,
    pub config: ProbeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idle_estimate: Option<IdleTimeoutEstimate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keepalive: Vec<KeepAliveResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency: Option<LatencySummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<ReportedError>,
}

impl CampaignReport {
    pub fn has_results(&self) -> bool {
        self.idle_estimate.is_some() || !self.keepalive.is_empty() || self.latency.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeepAliveRow {
    pub interval_min: u64,
    pub max_min: u64,
    pub p90_min: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffRow {
    pub checkpoint_label: String,
    pub started_at: String,
    pub idle_timeout_min: Option<u64>,
    pub keepalive: Vec<KeepAliveRow>,
}

impl DiffRow {
    fn values(&self) -> BTreeMap<String, u64> {
        let mut v = BTreeMap::new();
        if let Some(x) = self.idle_timeout_min {
            v.insert("idle_timeout".to_string(), x);
        }
        for k in &self.keepalive {
            v.insert(format!("keepalive_max@{}min", k.interval_min), k.max_min);
            v.insert(format!("keepalive_p90@{}min", k.interval_min), k.p90_min);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Change {
    pub checkpoint_label: String,
    pub previous_checkpoint: String,
    pub field: String,
    pub from: u64,
    pub to: u64,
    pub delta_min: i64,
}

impl fmt::Display for Change {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} → {} ({:+} min, {} → {})",
            self.field, self.from, self.to, self.delta_min, self.previous_checkpoint, self.checkpoint_label
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffReport {
    pub target_label: String,
    pub rows: Vec<DiffRow>,
    pub changes: Vec<Change>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("need at least two reports to compare, got {0}")]
    TooFewReports(usize),
    #[error("target mismatch: expected {expected}, found {found}")]
    TargetMismatch { expected: String, found: String },
    #[error("report {checkpoint} has an invalid started_at {value:?}")]
    InvalidTimestamp { checkpoint: String, value: String },
}

fn row(report: &CampaignReport) -> DiffRow {
    DiffRow {
        checkpoint_label: report.policy_checkpoint_label.clone(),
        started_at: report.started_at.clone(),
        idle_timeout_min: report.idle_estimate.as_ref().map(IdleTimeoutEstimate::minutes),
        keepalive: report
            .keepalive
            .iter()
            .map(|k| KeepAliveRow {
                interval_min: k.polling_interval.whole_minutes(),
                max_min: k.max.whole_minutes(),
                p90_min: k.p90.whole_minutes(),
            })
            .collect(),
    }
}

/// Orders reports by start time and flags every value that differs from the
/// previous checkpoint. Values missing on either side are not compared.
pub fn compare_checkpoints(reports: &[CampaignReport]) -> Result<DiffReport, DiffError> {
    if reports.len() < 2 {
        return Err(DiffError::TooFewReports(reports.len()));
    }
    let target = &reports[0].target_label;
    if let Some(other) = reports.iter().find(|r| &r.target_label != target) {
        return Err(DiffError::TargetMismatch { expected: target.clone(), found: other.target_label.clone() });
    }
    let mut dated: Vec<(DateTime<FixedOffset>, &CampaignReport)> = reports
        .iter()
        .map(|r| {
            DateTime::parse_from_rfc3339(&r.started_at).map(|t| (t, r)).map_err(|_| DiffError::InvalidTimestamp {
                checkpoint: r.policy_checkpoint_label.clone(),
                value: r.started_at.clone(),
            })
        })
        .collect::<Result<_, _>>()?;
    dated.sort_by_key(|(t, _)| *t);

    let rows: Vec<DiffRow> = dated.iter().map(|(_, r)| row(r)).collect();
    let mut changes = Vec::new();
    for pair in rows.windows(2) {
        let (before, after) = (pair[0].values(), pair[1].values());
        for (field, to) in &after {
            if let Some(from) = before.get(field) {
                if from != to {
                    changes.push(Change {
                        checkpoint_label: pair[1].checkpoint_label.clone(),
                        previous_checkpoint: pair[0].checkpoint_label.clone(),
                        field: field.clone(),
                        from: *from,
                        to: *to,
                        delta_min: *to as i64 - *from as i64,
                    });
                }
            }
        }
    }
    Ok(DiffReport { target_label: target.clone(), rows, changes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::CampaignSummary;
    use crate::lifecycle::Millis;

    fn summary() -> CampaignSummary {
        CampaignSummary::from_records("c", Millis::ZERO, &[])
    }

    fn report(target: &str, checkpoint: &str, started_at: &str, x: u64) -> CampaignReport {
        CampaignReport {
            target_label: target.into(),
            started_at: started_at.into(),
            policy_checkpoint_label: checkpoint.into(),
            tool_version: "test".into(),
            seed: 0,
            config: ProbeConfig::default(),
            idle_estimate: Some(IdleTimeoutEstimate {
                x: Millis::from_minutes(x),
                descent: vec![],
                confirm_at_x: summary(),
                confirm_at_x_plus_1: summary(),
                records: vec![],
            }),
            keepalive: vec![],
            latency: None,
            errors: vec![],
        }
    }

    #[test]
    fn aws_reduction_is_one_change() {
        let d = compare_checkpoints(&[
            report("aws", "2020-09", "2020-09-12T00:00:00Z", 10),
            report("aws", "2021-03", "2021-03-27T00:00:00Z", 5),
        ])
        .unwrap();
        assert_eq!(d.changes.len(), 1);
        assert_eq!(d.changes[0].field, "idle_timeout");
        assert_eq!((d.changes[0].from, d.changes[0].to, d.changes[0].delta_min), (10, 5, -5));
    }

    #[test]
    fn identical_reports_have_no_changes() {
        let r = report("ibm", "a", "2021-01-01T00:00:00Z", 10);
        assert!(compare_checkpoints(&[r.clone(), r]).unwrap().changes.is_empty());
    }

    #[test]
    fn rows_are_chronological() {
        let d = compare_checkpoints(&[
            report("az", "late", "2022-01-08T00:00:00Z", 12),
            report("az", "early", "2020-01-15T00:00:00+02:00", 20),
            report("az", "mid", "2020-09-12T00:00:00Z", 14),
        ])
        .unwrap();
        let labels: Vec<_> = d.rows.iter().map(|r| r.checkpoint_label.as_str()).collect();
        assert_eq!(labels, ["early", "mid", "late"]);
        assert_eq!(d.changes.len(), 2);
    }

    #[test]
    fn mismatched_targets_rejected() {
        let err = compare_checkpoints(&[
            report("aws", "a", "2020-01-01T00:00:00Z", 10),
            report("ibm", "b", "2020-02-01T00:00:00Z", 10),
        ])
        .unwrap_err();
        assert_eq!(err, DiffError::TargetMismatch { expected: "aws".into(), found: "ibm".into() });
        assert_eq!(compare_checkpoints(&[]).unwrap_err(), DiffError::TooFewReports(0));
        let bad = report("aws", "b", "yesterday", 10);
        assert!(matches!(
            compare_checkpoints(&[report("aws", "a", "2020-01-01T00:00:00Z", 10), bad]),
            Err(DiffError::InvalidTimestamp { .. })
        ));
    }
}
