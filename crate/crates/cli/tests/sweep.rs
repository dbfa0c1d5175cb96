use mdlab::sweep::{plot_series, selected_checks, summarize};
use mdlab::{run_check, run_sweep, sweep_points, CheckName, LabConfig, LabError};

const DEFAULT: &str = include_str!("../../../configs/default.toml");

fn config(overrides: &[&str]) -> LabConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    LabConfig::from_toml_with_overrides(DEFAULT, &o).unwrap()
}

#[test]
fn cartesian_points() {
    let c = config(&["sweep.N=[32, 64]", "sweep.beta=[0.5, 2.0]", "sweep.halfwidth=[]"]);
    let pts = sweep_points(&c);
    assert_eq!(pts.len(), 4);
    let pairs: Vec<(usize, f64)> = pts.iter().map(|p| (p.model.n, p.thermal.beta)).collect();
    assert_eq!(pairs, vec![(32, 0.5), (32, 2.0), (64, 0.5), (64, 2.0)]);
    assert!(pts.iter().all(|p| p.region.base_halfwidth == 5.0));
}

#[test]
fn empty_axes_give_one_run_and_empty_checks_mean_all() {
    let c = config(&["sweep.N=[]", "sweep.beta=[]", "sweep.halfwidth=[]", "sweep.checks=[]"]);
    assert_eq!(sweep_points(&c), vec![c.clone()]);
    assert_eq!(selected_checks(&c).unwrap(), CheckName::ALL.to_vec());
}

#[test]
fn sweep_produces_one_report_per_point_and_check() {
    let c = config(&[
        "sweep.N=[32, 64]",
        "sweep.beta=[0.5, 2.0]",
        "sweep.halfwidth=[]",
        "sweep.checks=[\"haag-duality\", \"standardness\"]",
    ]);
    let out = run_sweep(&c).unwrap();
    assert_eq!(out.reports.len(), 8);
    for check in ["haag-duality", "standardness"] {
        let rs: Vec<_> = out.reports.iter().filter(|r| r.check == check).collect();
        assert_eq!(rs.len(), 4);
    }
    assert!(out.all_passed(), "{:#?}", out.reports.iter().filter(|r| !r.pass).collect::<Vec<_>>());
    let haag = out.summary.iter().find(|s| s.check == "haag-duality").unwrap();
    assert_eq!((haag.runs, haag.passed), (4, 4));
    // region size grows with N at fixed width
    assert_eq!(haag.monotonicity["region_size/N"], 1);
    assert_eq!(haag.monotonicity["region_size/beta"], 1);
}

#[test]
fn sweep_is_deterministic_and_order_stable() {
    let c = config(&[
        "sweep.N=[16, 32]",
        "sweep.beta=[1.0]",
        "sweep.halfwidth=[2.5, 5.0]",
        "sweep.checks=[\"weyl-kms\", \"prop-orthogonals\"]",
    ]);
    let a = run_sweep(&c).unwrap();
    let b = run_sweep(&c).unwrap();
    assert_eq!(a.reports.len(), b.reports.len());
    assert!(a.reports.iter().zip(&b.reports).all(|(x, y)| x.same_outcome(y)));
    // config order, not scheduling order
    let order: Vec<&str> = a.reports.iter().map(|r| r.check.as_str()).collect();
    assert_eq!(order, ["weyl-kms", "prop-orthogonals"].repeat(4));
}

#[test]
fn summary_and_plot_series() {
    let c = config(&["sweep.N=[16, 32]", "sweep.beta=[]", "sweep.halfwidth=[]", "sweep.checks=[\"standardness\"]"]);
    let out = run_sweep(&c).unwrap();
    let series = plot_series(&out.reports, "standardness", "ambient", "N");
    assert_eq!(series, vec![(16.0, 64.0), (32.0, 128.0)]);
    let s = summarize(&out.reports);
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].worst["ambient"], 128.0);
    assert!(plot_series(&out.reports, "nope", "ambient", "N").is_empty());
}

#[test]
fn unknown_check_lists_valid_names() {
    let c = config(&[]);
    let err = run_check("araki", &c).unwrap_err();
    assert!(matches!(err, LabError::UnknownCheck { .. }));
    let msg = err.to_string();
    for name in CheckName::names() {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn failing_computation_becomes_failing_report() {
    // far beyond what double precision can polar-decompose
    let c = config(&["model.N=64", "thermal.beta=10.0"]);
    let r = run_check("modular-data", &c).unwrap();
    assert!(!r.pass);
    assert!(r.error.is_some());
}
