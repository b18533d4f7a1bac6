//! Reports are pretty-printed JSON; observations are JSON lines, one
//! [`InvocationRecord`] per line in declaration field order.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::ReportError;
use crate::engine::CampaignReport;
use crate::lifecycle::InvocationRecord;

pub fn report_to_string(report: &CampaignReport) -> Result<String, ReportError> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| ReportError::Json(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn report_from_str(text: &str) -> Result<CampaignReport, ReportError> {
    serde_json::from_str(text).map_err(|e| ReportError::Json(e.to_string()))
}

pub fn write_report(path: &Path, report: &CampaignReport) -> Result<(), ReportError> {
    fs::write(path, report_to_string(report)?).map_err(|e| ReportError::io(path, e))
}

pub fn read_report(path: &Path) -> Result<CampaignReport, ReportError> {
    let text = fs::read_to_string(path).map_err(|e| ReportError::io(path, e))?;
    report_from_str(&text).map_err(|e| ReportError::Json(format!("{}: {e}", path.display())))
}

pub fn write_records<W: Write>(out: W, records: &[InvocationRecord]) -> std::io::Result<()> {
    let mut out = BufWriter::new(out);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Reads JSON lines; blank lines are skipped. Errors carry the 1-based line.
pub fn read_records<R: Read>(input: R) -> Result<Vec<InvocationRecord>, ReportError> {
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(input).lines().enumerate() {
        let line = line.map_err(|e| ReportError::MalformedLine { line: idx + 1, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line)
            .map_err(|e| ReportError::MalformedLine { line: idx + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_records_file(path: &Path, records: &[InvocationRecord]) -> Result<(), ReportError> {
    let file = fs::File::create(path).map_err(|e| ReportError::io(path, e))?;
    write_records(file, records).map_err(|e| ReportError::io(path, e))
}

pub fn read_records_file(path: &Path) -> Result<Vec<InvocationRecord>, ReportError> {
    let file = fs::File::open(path).map_err(|e| ReportError::io(path, e))?;
    read_records(file)
}
