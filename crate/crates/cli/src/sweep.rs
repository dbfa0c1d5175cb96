//! Cartesian sweeps over `N`, `beta` and the region half-width.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::checks::{run, CheckName, CheckReport};
use crate::config::LabConfig;
use crate::error::{LabError, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "MDLAB_THREADS";

/// One config per point of `N × beta × halfwidth`. An empty axis keeps the
/// base value, so empty axes give a single run.
pub fn sweep_points(config: &LabConfig) -> Vec<LabConfig> {
    let ns = axis(&config.sweep.n, config.model.n);
    let betas = axis(&config.sweep.beta, config.thermal.beta);
    let widths = axis(&config.sweep.halfwidth, config.region.base_halfwidth);
    let mut points = Vec::with_capacity(ns.len() * betas.len() * widths.len());
    for &n in &ns {
        for &beta in &betas {
            for &hw in &widths {
                let mut c = config.clone();
                c.model.n = n;
                c.thermal.beta = beta;
                c.region.base_halfwidth = hw;
                points.push(c);
            }
        }
    }
    points
}

fn axis<T: Copy>(values: &[T], base: T) -> Vec<T> {
    if values.is_empty() {
        vec![base]
    } else {
        values.to_vec()
    }
}

pub fn selected_checks(config: &LabConfig) -> Result<Vec<CheckName>> {
    if config.sweep.checks.is_empty() {
        return Ok(CheckName::ALL.to_vec());
    }
    config.sweep.checks.iter().map(|n| CheckName::parse(n)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub check: String,
    pub runs: usize,
    pub passed: usize,
    /// Largest value of each metric over the sweep.
    pub worst: BTreeMap<String, f64>,
    /// For each metric and swept parameter: `1` if the per-value worst case
    /// is nondecreasing in the parameter, `-1` if nonincreasing, `0` otherwise.
    pub monotonicity: BTreeMap<String, i8>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub reports: Vec<CheckReport>,
    pub summary: Vec<CheckSummary>,
}

impl SweepOutcome {
    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }
}

/// Runs every selected check at every sweep point. Points run in parallel;
/// reports come back in point-major, check-minor order regardless of
/// scheduling.
pub fn run_sweep(config: &LabConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let checks = selected_checks(config)?;
    let jobs: Vec<(LabConfig, CheckName)> = sweep_points(config)
        .into_iter()
        .flat_map(|p| checks.iter().map(move |&c| (p.clone(), c)))
        .collect();
    let work = || jobs.par_iter().map(|(p, c)| run(*c, p)).collect::<Vec<_>>();
    let reports = match thread_cap()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| LabError::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let summary = summarize(&reports);
    Ok(SweepOutcome { reports, summary })
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(LabError::Config(format!("{THREADS_VAR} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

pub fn summarize(reports: &[CheckReport]) -> Vec<CheckSummary> {
    let mut by_check: BTreeMap<&str, Vec<&CheckReport>> = BTreeMap::new();
    for r in reports {
        by_check.entry(r.check.as_str()).or_default().push(r);
    }
    by_check
        .into_iter()
        .map(|(check, rs)| {
            let mut worst: BTreeMap<String, f64> = BTreeMap::new();
            for r in &rs {
                for (k, &v) in &r.metrics {
                    let e = worst.entry(k.clone()).or_insert(v);
                    *e = e.max(v);
                }
            }
            let mut monotonicity = BTreeMap::new();
            for metric in worst.keys() {
                for param in ["N", "beta", "halfwidth"] {
                    let series = worst_series(&rs, metric, param);
                    if series.len() > 1 {
                        monotonicity.insert(format!("{metric}/{param}"), trend(&series));
                    }
                }
            }
            CheckSummary {
                check: check.to_string(),
                runs: rs.len(),
                passed: rs.iter().filter(|r| r.pass).count(),
                worst,
                monotonicity,
            }
        })
        .collect()
}

/// `(parameter, worst metric at that parameter)` sorted by parameter.
fn worst_series(reports: &[&CheckReport], metric: &str, param: &str) -> Vec<(f64, f64)> {
    let mut points: Vec<(f64, f64)> = Vec::new();
    for r in reports {
        let (Some(&x), Some(&y)) = (r.params.get(param), r.metrics.get(metric)) else {
            continue;
        };
        match points.iter_mut().find(|(px, _)| *px == x) {
            Some(p) => p.1 = p.1.max(y),
            None => points.push((x, y)),
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    points
}

fn trend(series: &[(f64, f64)]) -> i8 {
    let up = series.windows(2).all(|w| w[1].1 >= w[0].1);
    let down = series.windows(2).all(|w| w[1].1 <= w[0].1);
    match (up, down) {
        (true, _) => 1,
        (false, true) => -1,
        _ => 0,
    }
}

/// Plot data: the worst value of `metric` for `check` at each value of `param`.
pub fn plot_series(reports: &[CheckReport], check: &str, metric: &str, param: &str) -> Vec<(f64, f64)> {
    let rs: Vec<&CheckReport> = reports.iter().filter(|r| r.check == check).collect();
    worst_series(&rs, metric, param)
}
