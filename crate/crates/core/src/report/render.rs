use std::fmt::Write;

use crate::engine::{CampaignReport, DiffReport};

fn aligned(rows: &[(String, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0) + 1;
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{:<width$} {}", format!("{k}:"), v, width = width);
    }
    out
}

/// Plain-text summary in the shape of the published results table.
pub fn render_summary(report: &CampaignReport) -> String {
    let mut rows: Vec<(String, String)> = vec![
        ("target".into(), report.target_label.clone()),
        ("checkpoint".into(), report.policy_checkpoint_label.clone()),
    ];
    if let Some(est) = &report.idle_estimate {
        rows.push(("idle_timeout_min".into(), est.minutes().to_string()));
    }
    for k in &report.keepalive {
        rows.push(("keepalive_interval_min".into(), k.polling_interval.whole_minutes().to_string()));
        rows.push(("keepalive_max_min".into(), k.max.whole_minutes().to_string()));
        rows.push(("keepalive_p90_min".into(), k.p90.whole_minutes().to_string()));
        rows.push(("keepalive_generations".into(), k.samples.len().to_string()));
    }
    if let Some(lat) = &report.latency {
        for w in &lat.workloads {
            rows.push((format!("latency_{}_cold_ms", w.workload), format!("{:.1}", w.cold_mean_ms)));
            rows.push((format!("latency_{}_warm_ms", w.workload), format!("{:.1}", w.warm_mean_ms)));
        }
    }
    for e in &report.errors {
        rows.push((format!("error[{}]", e.code), format!("{}: {}", e.campaign, e.message)));
    }
    aligned(&rows)
}

pub fn render_diff(diff: &DiffReport) -> String {
    let mut table: Vec<[String; 4]> = vec![[
        "checkpoint".into(),
        "started_at".into(),
        "idle_timeout_min".into(),
        "keepalive (interval:max/p90)".into(),
    ]];
    for row in &diff.rows {
        let keepalive = if row.keepalive.is_empty() {
            "-".to_string()
        } else {
            row.keepalive
                .iter()
                .map(|k| format!("{}:{}/{}", k.interval_min, k.max_min, k.p90_min))
                .collect::<Vec<_>>()
                .join(" ")
        };
        table.push([
            row.checkpoint_label.clone(),
            row.started_at.clone(),
            row.idle_timeout_min.map_or("-".to_string(), |x| x.to_string()),
            keepalive,
        ]);
    }
    let widths: Vec<usize> = (0..4).map(|c| table.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();

    let mut out = String::new();
    let _ = writeln!(out, "target: {}", diff.target_label);
    for r in &table {
        let line: Vec<String> = r.iter().zip(&widths).map(|(cell, w)| format!("{cell:<w$}")).collect();
        let _ = writeln!(out, "{}", line.join("  ").trim_end());
    }
    if diff.changes.is_empty() {
        let _ = writeln!(out, "no changes");
    } else {
        let _ = writeln!(out, "changes:");
        for c in &diff.changes {
            let _ = writeln!(out, "  {c}");
        }
    }
    out
}
