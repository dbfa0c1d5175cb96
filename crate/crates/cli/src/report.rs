//! Report files: JSON lines (the record of truth) and a long-format CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::checks::CheckReport;
use crate::error::{LabError, Result};

pub const SCHEMA: &str = "mdlab.report.v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    JsonLines,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json-lines" | "jsonl" => Ok(ReportFormat::JsonLines),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(LabError::Format(other.to_string())),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SchemaLine {
    schema: String,
}

/// Schema line, then one report per line.
pub fn write_jsonl<W: Write>(reports: &[CheckReport], mut out: W) -> Result<()> {
    serde_json::to_writer(&mut out, &SchemaLine { schema: SCHEMA.into() })?;
    writeln!(out)?;
    for r in reports {
        serde_json::to_writer(&mut out, r)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_jsonl<R: Read>(input: R) -> Result<Vec<CheckReport>> {
    let mut lines = BufReader::new(input).lines();
    let first = lines
        .next()
        .transpose()?
        .ok_or_else(|| LabError::Report("empty file, missing schema line".into()))?;
    let schema: SchemaLine = serde_json::from_str(&first)
        .map_err(|e| LabError::Report(format!("bad schema line: {e}")))?;
    if schema.schema != SCHEMA {
        return Err(LabError::Report(format!("unsupported schema `{}`", schema.schema)));
    }
    let mut reports = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        reports.push(serde_json::from_str(&line)?);
    }
    Ok(reports)
}

/// One row per metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub check: String,
    pub seed: u64,
    pub pass: bool,
    pub tolerance: f64,
    pub metric: String,
    pub value: f64,
}

pub const CSV_HEADER: [&str; 6] = ["check", "seed", "pass", "tolerance", "metric", "value"];

pub fn csv_rows(reports: &[CheckReport]) -> Vec<CsvRow> {
    reports
        .iter()
        .flat_map(|r| {
            r.metrics.iter().map(move |(k, &v)| CsvRow {
                check: r.check.clone(),
                seed: r.seed,
                pass: r.pass,
                tolerance: r.tolerance,
                metric: k.clone(),
                value: v,
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(reports: &[CheckReport], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in csv_rows(reports) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(LabError::Report(format!("unexpected csv header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(LabError::from)).collect()
}

/// `x,y` series for plotting a metric against a swept parameter.
pub fn write_plot_data<W: Write>(series: &[(f64, f64)], param: &str, metric: &str, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([param, metric])?;
    for (x, y) in series {
        w.write_record([x.to_string(), y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_reports<W: Write>(reports: &[CheckReport], format: ReportFormat, out: W) -> Result<()> {
    match format {
        ReportFormat::JsonLines => write_jsonl(reports, out),
        ReportFormat::Csv => write_csv(reports, out),
    }
}

/// Writes `reports` to `path`, replacing any existing file.
pub fn emit_report(reports: &[CheckReport], format: ReportFormat, path: &Path) -> Result<()> {
    let file = File::create(path)?;
    write_reports(reports, format, BufWriter::new(file))
}

pub fn load_reports(path: &Path) -> Result<Vec<CheckReport>> {
    read_jsonl(File::open(path)?)
}
