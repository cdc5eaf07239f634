//! CSV and JSON serialization of study reports.

use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::study::StudyReport;

/// CSV rendering of the aggregate rows: header plus one line per
/// family x level, '.' decimal and comma separator.
pub fn report_csv(report: &StudyReport) -> String {
    let mut out = String::from("family,alpha,coverage,scaled_avg_volume,volume_se\n");
    for row in &report.rows {
        let vol = row
            .scaled_avg_volume
            .map(|v| format!("{v}"))
            .unwrap_or_default();
        let se = row.volume_se.map(|v| format!("{v}")).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.family, row.alpha, row.coverage, vol, se
        ));
    }
    out
}

fn io_err(e: std::io::Error) -> Error {
    Error::InvalidParameter(format!("io error: {e}"))
}

/// Writes the aggregate CSV to `path`.
pub fn write_report(report: &StudyReport, path: &Path) -> Result<()> {
    std::fs::write(path, report_csv(report)).map_err(io_err)
}

/// Writes the full report (config, rows, per-point coverage vectors) as JSON.
pub fn write_report_json(report: &StudyReport, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::InvalidParameter(format!("serialization error: {e}")))?;
    std::fs::write(path, json).map_err(io_err)
}
