//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use mdlab::{run, run_all, CheckName, CheckReport, LabConfig};

const DEFAULT: &str = include_str!("../../../configs/default.toml");

// closed forms, 30-digit arithmetic
const A_BOUND_UNIT: f64 = 2.515_533_109_994_242_5;
const A_NORM_UNIT: f64 = 2.020_640_533_364_011_4;

fn config(overrides: &[String]) -> LabConfig {
    let c = LabConfig::from_toml_with_overrides(DEFAULT, overrides).expect("config");
    c.validate().expect("valid config");
    c
}

fn at(n: usize, beta: f64, halfwidth: f64) -> LabConfig {
    config(&[
        format!("model.N={n}"),
        format!("thermal.beta={beta}"),
        format!("region.base_halfwidth={halfwidth}"),
    ])
}

/// Collects failures for one criterion.
#[derive(Default)]
struct Verdict {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Verdict {
    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.failures.push(what());
        }
    }

    fn passed(&mut self, r: &CheckReport) {
        let ok = r.pass;
        self.require(ok, || match &r.error {
            Some(e) => format!("{} {:?}: {e}", r.check, r.params),
            None => format!("{} {:?} failed: {:?}", r.check, r.params, r.metrics),
        });
    }

    fn below(&mut self, r: &CheckReport, metric: &str, limit: f64) {
        let v = r.metric(metric).unwrap_or(f64::NAN);
        self.require(v < limit, || format!("{} {:?}: {metric} = {v:e}, limit {limit:e}", r.check, r.params));
    }

    fn equal(&mut self, r: &CheckReport, a: &str, b: &str) {
        let (x, y) = (r.metric(a), r.metric(b));
        self.require(x.is_some() && x == y, || format!("{} {:?}: {a} = {x:?}, {b} = {y:?}", r.check, r.params));
    }
}

fn purification() -> Verdict {
    let mut v = Verdict::default();
    for beta in [0.1, 1.0, 10.0] {
        let r = run(CheckName::Purification, &at(64, beta, 5.0));
        v.passed(&r);
        v.below(&r, "pythagoras_residual", 1e-12);
        v.below(&r, "ratio_residual", 1e-12);
        v.below(&r, "norm_residual_per_mode", 1e-10);
    }
    v
}

fn symplectic() -> Verdict {
    let mut v = Verdict::default();
    for beta in [0.1, 1.0, 10.0] {
        let r = run(CheckName::Purification, &at(64, beta, 5.0));
        v.require(r.metric("symplectic_pairs") == Some(100.0), || "expected 100 pairs".into());
        v.below(&r, "symplectic_deviation", 1e-10);
    }
    v
}

fn one_particle_kms() -> Verdict {
    let mut v = Verdict::default();
    let r = run(CheckName::OneParticleKms, &at(32, 1.0, 5.0));
    v.passed(&r);
    v.require(r.metric("pairs") == Some(20.0) && r.metric("times") == Some(17.0), || "pair/time counts".into());
    v.below(&r, "max_relative_deviation", 1e-9);
    v.notes.push(format!("literal residual {:.3e}", r.metric("literal_residual").unwrap_or(f64::NAN)));
    v
}

fn prop_orthogonals() -> Verdict {
    let mut v = Verdict::default();
    let r = run(CheckName::PropOrthogonals, &at(16, 1.0, 5.0));
    v.passed(&r);
    v.below(&r, "max_angle", 1e-8);
    v.require(r.metric("rank_mismatches") == Some(0.0), || "rank mismatch".into());
    v.require(r.metric("max_modes").is_some_and(|m| m <= 16.0), || "more than 16 modes".into());
    let bound = r.metric("a_bound").unwrap_or(f64::NAN);
    let norm = r.metric("a_norm_gap_mode").unwrap_or(f64::NAN);
    v.require((bound - A_BOUND_UNIT).abs() < 1e-12, || format!("A bound {bound}"));
    v.require((norm - A_NORM_UNIT).abs() < 1e-10, || format!("gap-mode ‖A‖ {norm}"));
    v.notes.push(format!("‖A‖ = {norm:.7} <= {bound:.7}"));
    v
}

fn generic_position() -> Verdict {
    let mut v = Verdict::default();
    let c = at(16, 1.0, 5.0);
    let g = run(CheckName::GenericPosition, &c);
    v.passed(&g);
    v.require(g.metric("instances") == Some(50.0), || "expected 50 instances".into());
    v.require(g.metric("overlap_instances").is_some_and(|n| n > 0.0), || "no instance with K1 ∧ K2 ≠ 0".into());
    v.require(g.metric("uv_nontrivial") == Some(0.0), || "U ∧ V ≠ 0".into());
    v.require(g.metric("iff_mismatches") == Some(0.0), || "iff criterion mismatch".into());
    let n = run(CheckName::NongenericCounterexample, &c);
    v.passed(&n);
    let res = n.metric("residual").unwrap_or(0.0);
    v.require(res > 1e-6, || format!("counterexample residual {res:e}"));
    v.notes.push(format!("counterexample residual {res:.3e}"));
    v
}

fn modular_data() -> Verdict {
    let mut v = Verdict::default();
    let r = run(CheckName::ModularData, &at(16, 1.0, 5.0));
    v.passed(&r);
    v.below(&r, "delta_rel_error", 1e-8);
    v.below(&r, "j_rel_error", 1e-8);
    v.below(&r, "jh_max_angle", 1e-8);
    v
}

fn araki() -> Verdict {
    let mut v = Verdict::default();
    for n in [32, 64, 128, 256] {
        for hw in [2.5, 5.0, 7.5] {
            let r = run(CheckName::ArakiDuality, &at(n, 1.0, hw));
            v.passed(&r);
            v.below(&r, "real_max_angle", 1e-8);
            v.below(&r, "imaginary_max_angle", 1e-8);
            v.equal(&r, "real_rank_left", "real_rank_right");
            v.equal(&r, "imaginary_rank_left", "imaginary_rank_right");
        }
    }
    v
}

fn haag() -> Verdict {
    let mut v = Verdict::default();
    for n in [16, 32, 64] {
        for beta in [0.5, 1.0, 2.0] {
            let r = run(CheckName::HaagDuality, &at(n, beta, 5.0));
            v.passed(&r);
            for p in ["u_complement", "v_complement", "assembled"] {
                v.below(&r, &format!("{p}_max_angle"), 1e-8);
                v.equal(&r, &format!("{p}_rank_left"), &format!("{p}_rank_right"));
            }
        }
    }
    v
}

fn propagator() -> Verdict {
    let mut v = Verdict::default();
    let r = run(CheckName::PropagatorIdentities, &config(&[]));
    v.passed(&r);
    v.below(&r, "initial_value", 1e-8);
    v.below(&r, "initial_velocity", 1e-8);
    v.below(&r, "e_after_p", 1e-9);
    v.below(&r, "p_after_e", 1e-9);
    v.below(&r, "round_trip", 1e-8);
    v.below(&r, "cutoff_independence", 1e-8);
    v
}

fn standardness() -> Verdict {
    let mut v = Verdict::default();
    for n in [16, 32, 64] {
        let c = at(n, 1.0, 5.0);
        let r = run(CheckName::Standardness, &c);
        v.passed(&r);
        v.require(r.metric("global_separating_dim") == Some(0.0), || format!("N={n}: global H ∧ iH ≠ 0"));
        v.equal(&r, "global_span_rank", "ambient");
        v.require(r.metric("local_separating_dim") == Some(0.0), || format!("N={n}: local separating part"));
        let model = c.field_model().unwrap();
        let size = c.region(&model).unwrap().size();
        let expected = 4.0 * (n - size) as f64;
        v.require(r.metric("local_deficit") == Some(expected), || {
            format!("N={n}: local deficit {:?}, expected {expected}", r.metric("local_deficit"))
        });
    }
    v
}

fn weyl() -> Verdict {
    let mut v = Verdict::default();
    let c = config(&[]);
    v.passed(&run(CheckName::WeylRelations, &c));
    v.passed(&run(CheckName::WeylKms, &c));
    let (a, b) = (run_all(&c), run_all(&c));
    let same = a.len() == b.len() && a.iter().zip(&b).all(|(x, y)| x.same_outcome(y));
    v.require(same, || "two runs with the same seed differ".into());
    v
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("purification identities", purification),
        ("symplectic preservation", symplectic),
        ("one-particle KMS", one_particle_kms),
        ("orthogonals of U and V", prop_orthogonals),
        ("generic position", generic_position),
        ("modular data", modular_data),
        ("Araki duality", araki),
        ("Haag duality", haag),
        ("propagator identities", propagator),
        ("standardness", standardness),
        ("Weyl layer and determinism", weyl),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = f();
        let status = if v.failures.is_empty() { "PASS" } else { "FAIL" };
        let notes = if v.notes.is_empty() {
            String::new()
        } else {
            format!(" [{}]", v.notes.join("; "))
        };
        println!("{status} {:>2} {name} ({:.2} s){notes}", i + 1, t.elapsed().as_secs_f64());
        for e in &v.failures {
            println!("       {e}");
        }
        failed += usize::from(!v.failures.is_empty());
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
