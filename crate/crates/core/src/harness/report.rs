use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::config::OutputFormat;
use super::suite::ReportRow;
use crate::error::{Result, VoError};

/// Column order of the CSV report.
pub const CSV_HEADER: [&str; 9] = [
    "task",
    "dim",
    "seed",
    "solver",
    "objective",
    "relative_error",
    "gap_certificate",
    "iterations",
    "wall_time_s",
];

fn io_err(e: impl std::fmt::Display) -> VoError {
    VoError::Solver(format!("report output: {e}"))
}

/// 17 significant digits, enough to round-trip any f64.
fn float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(CSV_HEADER).map_err(io_err)?;
    for r in rows {
        w.write_record([
            r.task.clone(),
            r.dim.to_string(),
            r.seed.to_string(),
            r.solver.clone(),
            float(r.objective),
            float(r.relative_error),
            float(r.gap_certificate),
            r.iterations.to_string(),
            float(r.wall_time_s),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// JSON array of row objects. Non-finite numbers become `null`.
pub fn write_json<W: Write>(rows: &[ReportRow], out: W) -> Result<()> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, rows).map_err(io_err)?;
    out.write_all(b"\n").map_err(io_err)
}

pub fn write_report(rows: &[ReportRow], path: &Path, format: OutputFormat) -> Result<()> {
    let file = BufWriter::new(File::create(path).map_err(io_err)?);
    match format {
        OutputFormat::Csv => write_csv(rows, file),
        OutputFormat::Json => write_json(rows, file),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ReportRow {
        ReportRow {
            task: "lasso".into(),
            dim: 3,
            seed: 7,
            solver: "shooting".into(),
            objective: 0.1,
            relative_error: 0.0,
            gap_certificate: f64::NAN,
            iterations: 12,
            wall_time_s: 1.5e-3,
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&[row()], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(
            lines[1],
            "lasso,3,7,shooting,1.0000000000000001e-1,0.0000000000000000e0,NaN,12,1.5000000000000000e-3"
        );
        let back: f64 = lines[1].split(',').nth(4).unwrap().parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn json_field_names() {
        let mut buf = Vec::new();
        write_json(&[row()], &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        let obj = v[0].as_object().unwrap();
        let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        let mut expected = CSV_HEADER.to_vec();
        expected.sort_unstable();
        assert_eq!(keys, expected);
        assert!(obj["gap_certificate"].is_null());
    }
}
