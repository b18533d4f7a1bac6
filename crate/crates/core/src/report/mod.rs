//! Configuration, persistence and the command-line workflows built on the
//! probe engine.

pub mod config;
pub mod persist;
mod render;

pub use config::{ProbeConfig, TargetKind};
pub use render::{render_diff, render_summary};

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use thiserror::Error;

use crate::adapter::{HttpAdapter, HttpAdapterConfig, InvocationAdapter, SimAdapter};
use crate::clock::{Clock, VirtualClock, WallClock};
use crate::engine::{
    compare_checkpoints, CampaignReport, DiffError, DiffReport, EngineError, IdleTimeoutEstimate, KeepAliveResult,
    LatencySummary, Prober, ReportedError,
};
use crate::lifecycle::{InvocationRecord, Millis};
use crate::simulator::{SimError, Simulator};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_CHANGED: i32 = 3;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Start time stamped on simulator reports unless the config sets one.
pub const SIMULATOR_EPOCH: &str = "1970-01-01T00:00:00+00:00";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Simulator(#[from] SimError),
}

impl ReportError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ReportError::Io { path: path.to_path_buf(), source }
    }
}

/// Exit status implied by the errors a probe run collected.
pub fn exit_code_for(errors: &[ReportedError]) -> i32 {
    let has = |codes: &[&str]| errors.iter().any(|e| codes.contains(&e.code.as_str()));
    if has(&["invalid_config", "invocation_failed", "identity_unavailable"]) {
        EXIT_ERROR
    } else if has(&[
        "inconsistent_platform",
        "upper_bound_too_low",
        "idle_timeout_below_step",
        "stale_platform_assumption",
    ]) {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    }
}

pub struct ProbeOutcome {
    pub report: CampaignReport,
    pub records: Vec<InvocationRecord>,
    pub exit_code: i32,
}

#[derive(Default)]
struct Results {
    idle: Option<IdleTimeoutEstimate>,
    keepalive: Vec<KeepAliveResult>,
    latency: Option<LatencySummary>,
    errors: Vec<ReportedError>,
}

impl Results {
    /// Records the error; returns true when later campaigns should not run.
    fn fail(&mut self, campaign: &str, err: EngineError) -> bool {
        let fatal = matches!(err, EngineError::Adapter(_));
        self.errors.push(ReportedError {
            campaign: campaign.to_string(),
            code: err.code().to_string(),
            message: err.to_string(),
        });
        fatal
    }
}

/// Runs the configured campaigns in order: search, keep-alive, latency.
/// Resolved defaults are written back into `config`.
fn run_campaigns<A: InvocationAdapter, C: Clock>(
    mut prober: Prober<A, C>,
    config: &mut ProbeConfig,
) -> (Results, Vec<InvocationRecord>) {
    let mut out = Results::default();
    let search = config.search.as_ref().map(|s| s.to_search_config());

    if let Some(search) = &search {
        match prober.find_idle_timeout(search) {
            Ok(est) => out.idle = Some(est),
            Err(e) => {
                if out.fail("search", e) {
                    return (out, prober.into_records());
                }
            }
        }
    }
    let estimate = out.idle.as_ref().map(|e| e.x);

    if let Some(section) = config.keepalive.as_mut() {
        let intervals = match (&section.interval_min, estimate) {
            (Some(iv), _) => Some(iv.minutes()),
            (None, Some(x)) => Some(vec![x.as_minutes_f64()]),
            (None, None) => None,
        };
        match intervals {
            // only reachable after a failed search, which is already reported
            None => {}
            Some(minutes) => {
                section.interval_min = Some(config::Intervals::Many(minutes.clone()));
                let max = Millis::from_minutes_f64(section.max_hours * 60.0);
                for m in minutes {
                    let interval = Millis::from_minutes_f64(m);
                    match prober.measure_keepalive(interval, max, section.min_generations) {
                        Ok(r) => out.keepalive.push(r),
                        Err(e) => {
                            if out.fail(&format!("keepalive@{interval}"), e) {
                                return (out, prober.into_records());
                            }
                        }
                    }
                }
            }
        }
    }

    if let Some(section) = config.latency.as_mut() {
        let cooldown = match (section.cooldown_min, estimate, &search) {
            (Some(c), _, _) => Millis::from_minutes_f64(c),
            (None, Some(x), Some(s)) => x + s.step,
            (None, None, Some(s)) => s.upper_bound + s.step,
            (None, _, None) => {
                config::SearchSection::default().to_search_config().upper_bound + Millis::from_minutes(1)
            }
        };
        section.cooldown_min = Some(cooldown.as_minutes_f64());
        match prober.measure_latency(&section.workloads, section.repetitions, cooldown) {
            Ok(l) => out.latency = Some(l),
            Err(e) => {
                out.fail("latency", e);
            }
        }
    }
    (out, prober.into_records())
}

/// Runs every configured campaign without touching the filesystem.
pub fn execute_probe(config: &ProbeConfig) -> Result<ProbeOutcome, ReportError> {
    config.validate()?;
    let mut effective = config.clone();
    let (results, records, started_at) = match config.target.kind {
        TargetKind::Simulator => {
            let sim = Simulator::new(config.target.resolve_policy()?, config.seed)?;
            let prober = Prober::new(SimAdapter::new(sim), VirtualClock::new())
                .with_retry_limit(config.target.retries)
                .with_workload(config.workload);
            let (results, records) = run_campaigns(prober, &mut effective);
            let started = config.output.started_at.clone().unwrap_or_else(|| SIMULATOR_EPOCH.to_string());
            (results, records, started)
        }
        TargetKind::Http => {
            let started = chrono::Utc::now().to_rfc3339();
            let mut http = HttpAdapterConfig::new(
                config.target.url.clone().expect("validated"),
                config.target.identity_source.clone().expect("validated"),
            );
            http.fib_n = config.target.fib_n;
            http.timeout = Duration::from_secs_f64(config.target.timeout_s);
            let prober = Prober::new(HttpAdapter::new(http), WallClock::start())
                .with_retry_limit(config.target.retries)
                .with_workload(config.workload);
            let (results, records) = run_campaigns(prober, &mut effective);
            (results, records, started)
        }
    };
    let exit_code = exit_code_for(&results.errors);
    let report = CampaignReport {
        target_label: config.label(),
        started_at,
        policy_checkpoint_label: config.checkpoint(),
        tool_version: TOOL_VERSION.to_string(),
        seed: config.seed,
        config: effective,
        idle_estimate: results.idle,
        keepalive: results.keepalive,
        latency: results.latency,
        errors: results.errors,
    };
    Ok(ProbeOutcome { report, records, exit_code })
}

fn file_stem(report: &CampaignReport) -> String {
    let raw = if report.policy_checkpoint_label == report.target_label {
        report.target_label.clone()
    } else {
        format!("{}_{}", report.target_label, report.policy_checkpoint_label)
    };
    raw.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '-' }).collect()
}

/// Paths of the files written by a probe run.
#[derive(Debug, Clone)]
pub struct ProbeFiles {
    pub report: PathBuf,
    pub records: PathBuf,
}

pub fn write_outcome(outcome: &ProbeOutcome, dir: &Path) -> Result<ProbeFiles, ReportError> {
    std::fs::create_dir_all(dir).map_err(|e| ReportError::io(dir, e))?;
    let stem = file_stem(&outcome.report);
    let files = ProbeFiles {
        report: dir.join(format!("{stem}.report.json")),
        records: dir.join(format!("{stem}.records.jsonl")),
    };
    persist::write_report(&files.report, &outcome.report)?;
    persist::write_records_file(&files.records, &outcome.records)?;
    Ok(files)
}

/// `probe <config>`: run, persist, print the summary; returns the exit code.
pub fn cli_probe(config_path: &Path, seed_override: Option<u64>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = (|| {
        let text = std::fs::read_to_string(config_path).map_err(|e| ReportError::io(config_path, e))?;
        let mut config = ProbeConfig::from_json(&text)?;
        if let Some(seed) = seed_override {
            config.seed = seed;
        }
        let outcome = execute_probe(&config)?;
        let files = write_outcome(&outcome, &config.output.dir)?;
        Ok::<_, ReportError>((outcome, files))
    })();
    match result {
        Ok((outcome, files)) => {
            let _ = write!(out, "{}", render_summary(&outcome.report));
            let _ = writeln!(out, "report:  {}", files.report.display());
            let _ = writeln!(out, "records: {}", files.records.display());
            outcome.exit_code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

pub fn diff_files(paths: &[PathBuf]) -> Result<DiffReport, ReportError> {
    let reports = paths.iter().map(|p| persist::read_report(p)).collect::<Result<Vec<_>, _>>()?;
    Ok(compare_checkpoints(&reports)?)
}

/// `diff <reports...>`: exit 0 when nothing changed, 3 when something did.
pub fn cli_diff(paths: &[PathBuf], json_out: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let diff = match diff_files(paths) {
        Ok(d) => d,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    };
    if let Some(path) = json_out {
        let written = serde_json::to_string_pretty(&diff)
            .map_err(|e| ReportError::Json(e.to_string()))
            .and_then(|text| std::fs::write(path, text + "\n").map_err(|e| ReportError::io(path, e)));
        if let Err(e) = written {
            let _ = writeln!(err, "error: {e}");
            return EXIT_ERROR;
        }
    }
    let _ = write!(out, "{}", render_diff(&diff));
    if diff.changes.is_empty() {
        EXIT_OK
    } else {
        EXIT_CHANGED
    }
}
