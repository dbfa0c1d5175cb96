use std::collections::BTreeMap;

use mdlab::report::{csv_rows, load_reports, CSV_HEADER};
use mdlab::{emit_report, read_csv, read_jsonl, write_csv, write_jsonl, CheckReport, LabError, ReportFormat, SCHEMA};

fn report(check: &str, value: f64) -> CheckReport {
    CheckReport {
        check: check.to_string(),
        params: BTreeMap::from([("N".to_string(), 32.0), ("beta".to_string(), 1.0)]),
        metrics: BTreeMap::from([("max_angle".to_string(), value), ("rank".to_string(), 12.0)]),
        tolerance: 1e-8,
        pass: value < 1e-8,
        wall_time: 0.25,
        seed: 7,
        rng: "chacha8".to_string(),
        error: None,
    }
}

#[test]
fn empty_jsonl_has_only_the_schema_line() {
    let mut buf = Vec::new();
    write_jsonl(&[], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.contains(SCHEMA));
    assert!(read_jsonl(text.as_bytes()).unwrap().is_empty());
}

#[test]
fn empty_csv_has_only_the_header() {
    let mut buf = Vec::new();
    write_csv(&[], &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.trim_end(), CSV_HEADER.join(","));
    assert!(read_csv(text.as_bytes()).unwrap().is_empty());
}

#[test]
fn jsonl_has_one_line_per_report_and_round_trips() {
    let reports: Vec<CheckReport> = (0..4).map(|i| report("haag-duality", 1e-9 * i as f64)).collect();
    let mut buf = Vec::new();
    write_jsonl(&reports, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf.clone()).unwrap().lines().count(), 5);
    assert_eq!(read_jsonl(buf.as_slice()).unwrap(), reports);
}

#[test]
fn csv_keeps_full_precision() {
    let tricky = [0.1 + 0.2, std::f64::consts::PI * 1e-13, 2.515_533_109_994_242_5, f64::MIN_POSITIVE];
    let reports: Vec<CheckReport> = tricky.iter().map(|&v| report("purification", v)).collect();
    let mut buf = Vec::new();
    write_csv(&reports, &mut buf).unwrap();
    let rows = read_csv(buf.as_slice()).unwrap();
    assert_eq!(rows, csv_rows(&reports));
    let values: Vec<f64> = rows.iter().filter(|r| r.metric == "max_angle").map(|r| r.value).collect();
    assert_eq!(values, tricky);
}

#[test]
fn error_reports_survive_serialization() {
    let mut r = report("modular-data", 0.0);
    r.pass = false;
    r.error = Some("modular operator is too ill-conditioned".into());
    let mut buf = Vec::new();
    write_jsonl(std::slice::from_ref(&r), &mut buf).unwrap();
    assert_eq!(read_jsonl(buf.as_slice()).unwrap(), vec![r]);
}

#[test]
fn wrong_schema_is_rejected() {
    let text = "{\"schema\":\"mdlab.report.v0\"}\n";
    assert!(matches!(read_jsonl(text.as_bytes()), Err(LabError::Report(_))));
    assert!(matches!(read_jsonl("".as_bytes()), Err(LabError::Report(_))));
    assert!(matches!(read_csv("a,b\n1,2\n".as_bytes()), Err(LabError::Report(_))));
}

#[test]
fn formats_parse_and_files_are_replaced() {
    assert_eq!("jsonl".parse::<ReportFormat>().unwrap(), ReportFormat::JsonLines);
    assert_eq!("json-lines".parse::<ReportFormat>().unwrap(), ReportFormat::JsonLines);
    assert_eq!("csv".parse::<ReportFormat>().unwrap(), ReportFormat::Csv);
    assert!("xml".parse::<ReportFormat>().is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.jsonl");
    emit_report(&[report("a", 1.0), report("b", 2.0)], ReportFormat::JsonLines, &path).unwrap();
    emit_report(&[report("c", 3.0)], ReportFormat::JsonLines, &path).unwrap();
    let back = load_reports(&path).unwrap();
    assert_eq!(back.len(), 1);
    assert_eq!(back[0].check, "c");
}
