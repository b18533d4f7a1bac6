use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use idleprobe::report::persist;
use serde_json::{json, Value};

fn idleprobe() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_idleprobe"));
    cmd.env_remove("PROBE_SEED");
    cmd
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, config: &Value) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

fn sim_config(preset: &str, out: &Path, label: &str, checkpoint: &str) -> Value {
    json!({
        "seed": 7,
        "target": {"kind": "simulator", "preset": preset},
        "search": {},
        "keepalive": {},
        "latency": {},
        "output": {"dir": out, "label": label, "checkpoint": checkpoint}
    })
}

fn summary_value<'a>(text: &'a str, key: &str) -> Vec<&'a str> {
    text.lines().filter_map(|l| l.strip_prefix(&format!("{key}:"))).map(str::trim).collect()
}

#[test]
fn probe_aws_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "aws", &sim_config("aws-2021", dir.path(), "aws", "07-2021"));
    let out = idleprobe().arg("probe").arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(summary_value(&text, "idle_timeout_min"), ["5"]);
    assert_eq!(summary_value(&text, "keepalive_max_min"), ["145"]);
    assert_eq!(summary_value(&text, "keepalive_p90_min"), ["140"]);
    assert!(dir.path().join("aws_07-2021.report.json").exists());
    let records = persist::read_records_file(&dir.path().join("aws_07-2021.records.jsonl")).unwrap();
    assert!(records.len() > 100);
}

#[test]
fn short_campaign_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = sim_config("aws-2021", dir.path(), "aws", "x");
    cfg["search"] = json!({"upper_bound_min": 20, "campaign_hours": 0.5});
    let path = write_config(dir.path(), "bad", &cfg);
    let out = idleprobe().arg("probe").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("twice"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = sim_config("aws-2021", dir.path(), "aws", "x");
    cfg["serach"] = json!({});
    let path = write_config(dir.path(), "typo", &cfg);
    let out = idleprobe().arg("probe").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_preset_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "p", &sim_config("gcp-2021", dir.path(), "g", "x"));
    let out = idleprobe().arg("probe").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn low_upper_bound_exits_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "az", &sim_config("azure-2020-02", dir.path(), "azure", "02-2020"));
    let out = idleprobe().arg("probe").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).contains("error[upper_bound_too_low]"));
}

#[test]
fn azure_keepalive_depends_on_polling_interval() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = sim_config("azure-2021", dir.path(), "azure", "2021");
    cfg["keepalive"] = json!({"interval_min": [5, 10]});
    cfg.as_object_mut().unwrap().remove("latency");
    let path = write_config(dir.path(), "az", &cfg);
    let out = idleprobe().arg("probe").arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(summary_value(&text, "keepalive_interval_min"), ["5", "10"]);
    assert_eq!(summary_value(&text, "keepalive_max_min"), ["2670", "20"]);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let path = write_config(dir.path(), "ibm", &sim_config("ibm-2021", out, "ibm", "2021"));
        assert_eq!(idleprobe().arg("probe").arg(&path).status().unwrap().code(), Some(0));
    }
    for file in ["ibm_2021.report.json", "ibm_2021.records.jsonl"] {
        let left = std::fs::read(a.join(file)).unwrap();
        let right = std::fs::read(b.join(file)).unwrap();
        let left = String::from_utf8(left).unwrap().replace(a.to_str().unwrap(), "");
        let right = String::from_utf8(right).unwrap().replace(b.to_str().unwrap(), "");
        assert_eq!(left, right, "{file}");
    }
}

#[test]
fn seed_override_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "aws", &sim_config("aws-2021", dir.path(), "aws", "s"));
    let out = idleprobe().arg("probe").arg(&path).env("PROBE_SEED", "99").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report = persist::read_report(&dir.path().join("aws_s.report.json")).unwrap();
    assert_eq!(report.seed, 99);

    let out = idleprobe().arg("probe").arg(&path).env("PROBE_SEED", "many").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn presets_are_listed() {
    let out = idleprobe().arg("presets").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for name in idleprobe::simulator::presets::PRESET_NAMES {
        assert!(text.contains(name), "{name}");
    }
    let out = idleprobe().args(["presets", "--json"]).output().unwrap();
    let parsed: Vec<idleprobe::ProviderPolicy> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed.len(), 7);
}

fn probe_checkpoint(dir: &Path, preset: &str, checkpoint: &str, started_at: &str) -> PathBuf {
    let mut cfg = sim_config(preset, dir, "aws", checkpoint);
    cfg["output"]["started_at"] = json!(started_at);
    cfg.as_object_mut().unwrap().remove("latency");
    let path = write_config(dir, checkpoint, &cfg);
    assert_eq!(idleprobe().arg("probe").arg(&path).status().unwrap().code(), Some(0));
    dir.join(format!("aws_{checkpoint}.report.json"))
}

#[test]
fn diff_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let old = probe_checkpoint(dir.path(), "aws-2020", "2020", "2020-02-01T00:00:00Z");
    let old2 = probe_checkpoint(dir.path(), "aws-2020", "2020b", "2020-06-01T00:00:00Z");
    let new = probe_checkpoint(dir.path(), "aws-2021", "2021", "2021-07-01T00:00:00Z");

    let same = idleprobe().arg("diff").arg(&old).arg(&old2).output().unwrap();
    assert_eq!(same.status.code(), Some(0));
    assert!(stdout(&same).contains("no changes"));

    let json_out = dir.path().join("diff.json");
    let changed = idleprobe().arg("diff").arg(&new).arg(&old).arg("--out").arg(&json_out).output().unwrap();
    assert_eq!(changed.status.code(), Some(3));
    assert!(stdout(&changed).contains("idle_timeout: 10 → 5"), "{}", stdout(&changed));
    let diff: Value = serde_json::from_str(&std::fs::read_to_string(&json_out).unwrap()).unwrap();
    assert_eq!(diff["rows"][0]["checkpoint_label"], "2020");

    let single = idleprobe().arg("diff").arg(&old).output().unwrap();
    assert_eq!(single.status.code(), Some(1));
    let missing = idleprobe().arg("diff").arg(&old).arg(dir.path().join("nope.json")).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
}
