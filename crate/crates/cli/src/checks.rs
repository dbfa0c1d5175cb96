//! The verification checks. Each one owns its random instances, drawn from
//! a ChaCha8 stream seeded by the config, and returns a [`CheckReport`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use mdlab_core::duality::DualityContext;
use mdlab_core::field::local::araki_duality_check;
use mdlab_core::field::propagator::{propagator_annihilates_klein_gordon, relative_error};
use mdlab_core::field::{
    causal_propagator, source_from_initial_data, BumpShape, BumpSpec, Cutoff, LocalThermal, TestFunction,
};
use mdlab_core::quasifree::{
    inner, verify_one_particle_kms, verify_symplectic_preservation, GroundStructure, ThermalDoubling,
};
use mdlab_core::random::{
    random_complex_vector, random_subspace, random_subspace_within, random_vector, random_well_conditioned,
    seeded_rng, LabRng,
};
use mdlab_core::weyl::{
    evaluate_quasifree, free_dynamics, kms_boundary_check, positivity_report, segal_round_trip,
    weyl_multiply, weyl_relation_report, weyl_star, QuasifreeState, SegalSplitting, WeylTwoPoint, WeylWord,
};
use mdlab_core::{check_bounded_inverse_identity, Complex, DMatrix, DVector, RealLinearOperator};

use crate::config::LabConfig;
use crate::error::{LabError, Result};

/// Name of the generator every report records.
pub const RNG_NAME: &str = "chacha8";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckName {
    SubspaceAxioms,
    BoundedInverse,
    Purification,
    OneParticleKms,
    PropOrthogonals,
    GenericPosition,
    NongenericCounterexample,
    ModularData,
    PropagatorIdentities,
    ArakiDuality,
    HaagDuality,
    Standardness,
    WeylRelations,
    WeylKms,
}

impl CheckName {
    pub const ALL: [CheckName; 14] = [
        CheckName::SubspaceAxioms,
        CheckName::BoundedInverse,
        CheckName::Purification,
        CheckName::OneParticleKms,
        CheckName::PropOrthogonals,
        CheckName::GenericPosition,
        CheckName::NongenericCounterexample,
        CheckName::ModularData,
        CheckName::PropagatorIdentities,
        CheckName::ArakiDuality,
        CheckName::HaagDuality,
        CheckName::Standardness,
        CheckName::WeylRelations,
        CheckName::WeylKms,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::SubspaceAxioms => "subspace-axioms",
            CheckName::BoundedInverse => "bounded-inverse",
            CheckName::Purification => "purification",
            CheckName::OneParticleKms => "one-particle-kms",
            CheckName::PropOrthogonals => "prop-orthogonals",
            CheckName::GenericPosition => "generic-position",
            CheckName::NongenericCounterexample => "nongeneric-counterexample",
            CheckName::ModularData => "modular-data",
            CheckName::PropagatorIdentities => "propagator-identities",
            CheckName::ArakiDuality => "araki-duality",
            CheckName::HaagDuality => "haag-duality",
            CheckName::Standardness => "standardness",
            CheckName::WeylRelations => "weyl-relations",
            CheckName::WeylKms => "weyl-kms",
        }
    }

    pub fn names() -> Vec<&'static str> {
        Self::ALL.iter().map(|c| c.as_str()).collect()
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == name)
            .ok_or_else(|| LabError::UnknownCheck {
                name: name.to_string(),
                valid: Self::names(),
            })
    }

    // distinct stream per check so reordering a sweep changes nothing
    fn salt(self) -> u64 {
        0x9e37_79b9_7f4a_7c15u64.wrapping_mul(self as u64 + 1)
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: BTreeMap<String, f64>,
    pub metrics: BTreeMap<String, f64>,
    pub tolerance: f64,
    pub pass: bool,
    /// Seconds.
    pub wall_time: f64,
    pub seed: u64,
    pub rng: String,
    /// Set when the check could not be carried out on this configuration.
    pub error: Option<String>,
}

impl CheckReport {
    /// Equal in everything except wall time.
    pub fn same_outcome(&self, other: &CheckReport) -> bool {
        self.check == other.check
            && self.params == other.params
            && self.metrics == other.metrics
            && self.tolerance == other.tolerance
            && self.pass == other.pass
            && self.seed == other.seed
            && self.rng == other.rng
            && self.error == other.error
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }
}

#[derive(Debug, Default)]
struct Outcome {
    metrics: BTreeMap<String, f64>,
    tolerance: f64,
    pass: bool,
}

impl Outcome {
    fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            ..Self::default()
        }
    }

    fn set(&mut self, name: &str, value: impl Into<f64>) {
        self.metrics.insert(name.to_string(), value.into());
    }

    fn count(&mut self, name: &str, value: usize) {
        self.set(name, value as f64);
    }

    fn finish(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

pub fn run_check(name: &str, config: &LabConfig) -> Result<CheckReport> {
    config.validate()?;
    Ok(run(CheckName::parse(name)?, config))
}

/// Runs one check. Failures of the underlying computation become failing
/// reports carrying the error message.
pub fn run(name: CheckName, config: &LabConfig) -> CheckReport {
    let start = Instant::now();
    let mut rng = seeded_rng(config.rng_seed ^ name.salt());
    let outcome = match name {
        CheckName::SubspaceAxioms => subspace_axioms(config, &mut rng),
        CheckName::BoundedInverse => bounded_inverse(config, &mut rng),
        CheckName::Purification => purification(config, &mut rng),
        CheckName::OneParticleKms => one_particle_kms(config, &mut rng),
        CheckName::PropOrthogonals => prop_orthogonals(config, &mut rng),
        CheckName::GenericPosition => generic_position(config, &mut rng),
        CheckName::NongenericCounterexample => nongeneric_counterexample(config, &mut rng),
        CheckName::ModularData => modular_data(config),
        CheckName::PropagatorIdentities => propagator_identities(config),
        CheckName::ArakiDuality => araki_duality(config),
        CheckName::HaagDuality => haag_duality(config),
        CheckName::Standardness => standardness(config),
        CheckName::WeylRelations => weyl_relations(config, &mut rng),
        CheckName::WeylKms => weyl_kms(config, &mut rng),
    };
    let (outcome, error) = match outcome {
        Ok(o) => (o, None),
        Err(e) => (Outcome::default(), Some(e.to_string())),
    };
    CheckReport {
        check: name.as_str().to_string(),
        params: params(config),
        metrics: outcome.metrics,
        tolerance: outcome.tolerance,
        pass: outcome.pass && error.is_none(),
        wall_time: start.elapsed().as_secs_f64(),
        seed: config.rng_seed,
        rng: RNG_NAME.to_string(),
        error,
    }
}

pub fn run_all(config: &LabConfig) -> Vec<CheckReport> {
    CheckName::ALL.iter().map(|&c| run(c, config)).collect()
}

fn params(config: &LabConfig) -> BTreeMap<String, f64> {
    let m = &config.model;
    [
        ("d", m.d as f64),
        ("N", m.n as f64),
        ("L", m.length),
        ("mass", m.mass),
        ("M", m.time_grid.points as f64),
        ("T", m.time_grid.extent),
        ("beta", config.thermal.beta),
        ("center", config.region.base_center),
        ("halfwidth", config.region.base_halfwidth),
        ("tol_rank", config.tolerances.tol_rank),
        ("tol_eq", config.tolerances.tol_eq),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

/// Generic dispersion for the abstract duality checks: `n` random momenta
/// in `[-3, 3]`, one of them pinned to zero so that the gap is attained.
fn sample_ground(rng: &mut LabRng, n: usize, mass: f64) -> Result<GroundStructure> {
    let momenta: Vec<f64> = (0..n)
        .map(|k| if k == 0 { 0.0 } else { rng.random_range(-3.0..3.0) })
        .collect();
    Ok(GroundStructure::relativistic(&momenta, mass)?)
}

fn sample_beta(rng: &mut LabRng) -> f64 {
    rng.random_range((0.25f64).ln()..(4.0f64).ln()).exp()
}

fn abstract_modes(config: &LabConfig) -> usize {
    config.model.n.pow(config.model.d as u32).min(16)
}

fn subspace_axioms(config: &LabConfig, rng: &mut LabRng) -> Result<Outcome> {
    let tol = config.tolerances();
    let n = 2 * abstract_modes(config).max(2);
    let mut out = Outcome::new(tol.tol_eq);
    let (mut worst_angle, mut rank_errors) = (0.0f64, 0usize);
    for _ in 0..10 {
        let (k1, k2) = (rng.random_range(0..=n), rng.random_range(0..=n));
        let a = random_subspace(rng, n, k1);
        let b = random_subspace(rng, n, k2);
        let a_perp = a.orthocomplement(None, tol.tol_eq)?;
        let b_perp = b.orthocomplement(None, tol.tol_eq)?;
        rank_errors += usize::from(a_perp.rank() != n - k1);
        rank_errors += a.intersect(&a_perp, tol.tol_eq)?.rank();
        rank_errors += usize::from(a.sum(&a_perp)?.rank() != n);
        rank_errors += usize::from(a.intersect(&b, tol.tol_eq)?.rank() != (k1 + k2).saturating_sub(n));

        let double = a_perp.orthocomplement(None, tol.tol_eq)?.compare(&a, tol.tol_eq)?;
        let de_morgan = a
            .sum(&b)?
            .orthocomplement(None, tol.tol_eq)?
            .compare(&a_perp.intersect(&b_perp, tol.tol_eq)?, tol.tol_eq)?;
        let self_angle = a.principal_angles(&a)?.into_iter().fold(0.0, f64::max);
        for c in [double, de_morgan] {
            rank_errors += usize::from(c.rank_left != c.rank_right);
            worst_angle = worst_angle.max(c.max_angle);
        }
        worst_angle = worst_angle.max(self_angle);
    }
    out.count("instances", 10);
    out.count("ambient_dim", n);
    out.count("rank_errors", rank_errors);
    out.set("max_angle", worst_angle);
    Ok(out.finish(rank_errors == 0 && worst_angle < tol.tol_eq))
}

fn bounded_inverse(config: &LabConfig, rng: &mut LabRng) -> Result<Outcome> {
    let tol = config.tolerances();
    let n = 2 * abstract_modes(config).max(2);
    let mut out = Outcome::new(tol.tol_eq);
    let (mut worst_angle, mut worst_condition, mut rank_errors) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..10 {
        let a = RealLinearOperator::new(random_well_conditioned(rng, n, 1e3));
        let rank = rng.random_range(0..=n);
        let v = random_subspace(rng, n, rank);
        let r = check_bounded_inverse_identity(&a, &v, &tol)?;
        worst_angle = worst_angle.max(r.comparison.max_angle);
        worst_condition = worst_condition.max(r.condition);
        rank_errors += usize::from(!r.comparison.pass);
    }
    // a singular operator has no bounded inverse and must be refused
    let mut m = DMatrix::identity(n, n);
    m[(0, 0)] = 0.0;
    let rejected = RealLinearOperator::new(m).inverse().is_err();
    out.count("instances", 10);
    out.set("max_angle", worst_angle);
    out.set("max_condition", worst_condition);
    out.count("failed_comparisons", rank_errors);
    out.set("singular_rejected", if rejected { 1.0 } else { 0.0 });
    Ok(out.finish(rank_errors == 0 && worst_angle < tol.tol_eq && rejected))
}

fn purification(config: &LabConfig, rng: &mut LabRng) -> Result<Outcome> {
    let model = config.field_model()?;
    let beta = config.thermal.beta;
    let thermal = ThermalDoubling::new(model.ground(), beta)?;
    let mut out = Outcome::new(1e-10);
    let (pyth, ratio) = thermal.weight_residuals();

    // per mode: ‖K^β e_k‖² = s² + c² = coth(βω/2)
    let n = thermal.n_modes();
    let omega = model.omega();
    let mut norm_per_mode = 0.0f64;
    for k in 0..n {
        let mut e = DVector::zeros(n);
        e[k] = Complex::new(1.0, 0.0);
        let coth = 1.0 / (0.5 * beta * omega[k]).tanh();
        norm_per_mode = norm_per_mode.max((thermal.k_beta(&e).norm_squared() - coth).abs() / coth);
    }
    let mut norm_random = 0.0f64;
    let mut symplectic = 0.0f64;
    for _ in 0..100 {
        let u = random_complex_vector(rng, n).normalize();
        let v = random_complex_vector(rng, n).normalize();
        let weighted: f64 = (0..n)
            .map(|k| u[k].norm_sqr() / (0.5 * beta * omega[k]).tanh())
            .sum();
        norm_random = norm_random.max((thermal.k_beta(&u).norm_squared() - weighted).abs() / weighted);
        symplectic = symplectic.max(verify_symplectic_preservation(&thermal, &u, &v, 1e-10).deviation);
    }
    out.count("modes", n);
    out.set("pythagoras_residual", pyth);
    out.set("ratio_residual", ratio);
    out.set("norm_residual_per_mode", norm_per_mode);
    out.set("norm_residual_random", norm_random);
    out.set("symplectic_deviation", symplectic);
    out.count("symplectic_pairs", 100);
    let pass = pyth < 1e-12 && ratio < 1e-12 && norm_per_mode < 1e-10 && norm_random < 1e-10 && symplectic < 1e-10;
    Ok(out.finish(pass))
}

fn one_particle_kms(config: &LabConfig, rng: &mut LabRng) -> Result<Outcome> {
    let model = config.field_model()?;
    let thermal = ThermalDoubling::new(model.ground(), config.thermal.beta)?;
    let tol = 1e-9;
    let times: Vec<f64> = (0..17).map(|i| -2.0 + 0.25 * i as f64).collect();
    let (mut worst, mut literal, mut failures) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..20 {
        let u = random_complex_vector(rng, thermal.n_modes()).normalize();
        let v = random_complex_vector(rng, thermal.n_modes()).normalize();
        let r = verify_one_particle_kms(&thermal, &u, &v, &times, tol);
        worst = worst.max(r.relative_deviation);
        literal = literal.max(r.literal_residual);
        failures += usize::from(!r.pass);
    }
    let mut out = Outcome::new(tol);
    out.count("pairs", 20);
    out.count("times", times.len());
    out.set("max_relative_deviation", worst);
    out.set("literal_residual", literal);
    Ok(out.finish(failures == 0))
}

fn prop_orthogonals(config: &LabConfig, rng: &mut LabRng) -> Result<Outcome> {
    let tol = config.tolerances();
    let n_max = abstract_modes(config).max(2);
    let (mut worst_angle, mut rank_mismatch, mut failed, mut worst_ratio) = (0.0f64, 0usize, 0usize, 0.0f64);
    for _ in 0..50 {
        let n = rng.random_range(2..=n_max);
        let beta = sample_beta(rng);
        let thermal = ThermalDoubling::new(sample_ground(rng, n, config.model.mass)?, beta)?;
        let ctx = DualityContext::with_real_factor(thermal, tol)?;
        let (r1, r2) = (rng.random_range(0..=n), rng.random_range(0..=n));
        let k1 = random_subspace_within(rng, ctx.factor(), r1);
        let k2 = random_subspace_within(rng, ctx.factor(), r2);
        for c in [ctx.orthocomplement_u(&k1)?, ctx.orthocomplement_v(&k2)?] {
            worst_angle = worst_angle.max(c.max_angle);
            rank_mismatch += usize::from(c.rank_left != c.rank_right);
            failed += usize::from(!c.pass);
        }
        let a = ctx.operator_a_report();
        worst_ratio = worst_ratio.max(a.norm / a.bound);
        failed += usize::from(!a.pass);
    }
    // the gap mode at the configured temperature
    let gap = GroundStructure::new(DVector::from_element(1, config.model.mass), config.model.mass)?;
    let ctx = DualityContext::with_real_factor(ThermalDoubling::new(gap, config.thermal.beta)?, tol)?;
    let a = ctx.operator_a_report();
    let mut out = Outcome::new(tol.tol_eq);
    out.count("instances", 50);
    out.count("max_modes", n_max);
    out.set("max_angle", worst_angle);
    out.count("rank_mismatches", rank_mismatch);
    out.count("failed_comparisons", failed);
    out.set("max_norm_over_bound", worst_ratio);
    out.set("a_norm_gap_mode", a.norm);
    out.set("a_bound", a.bound);
    out.set("a_identity_residual", a.identity_residual);
    let pass = failed == 0 && rank_mismatch == 0 && worst_angle < tol.tol_eq && a.pass && worst_ratio <= 1.0 + 1e-12;
    Ok(out.finish(pass))
}

fn generic_position(config: &LabConfig, rng: &mut LabRng) -> Result<Outcome> {
    let tol = config.tolerances();
    let n_max = abstract_modes(config).max(3);
    let (mut overlap, mut uv_nontrivial, mut iff_mismatch, mut complement_mismatch, mut k1_k2perp) =
        (0usize, 0usize, 0usize, 0usize, 0usize);
    for i in 0..50 {
        let n = rng.random_range(3..=n_max);
        let beta = sample_beta(rng);
        let thermal = ThermalDoubling::new(sample_ground(rng, n, config.model.mass)?, beta)?;
        let ctx = DualityContext::with_real_factor(thermal, tol)?;
        let k1_rank = rng.random_range(1..=n);
        let k1 = random_subspace_within(rng, ctx.factor(), k1_rank);
        let k2 = match i % 3 {
            // forced overlap: dim K1 + dim K2 > dim K
            0 => {
                let rank = rng.random_range((n - k1_rank + 1)..=n);
                random_subspace_within(rng, ctx.factor(), rank)
            }
            // K2 inside K1^⊥, so that K1 ∧ K2^⊥ = K1
            1 => {
                let perp = ctx.complement_in_factor(&k1)?;
                let rank = rng.random_range(0..=perp.rank());
                random_subspace_within(rng, &perp, rank)
            }
            _ => {
                let rank = rng.random_range(0..=n);
                random_subspace_within(rng, ctx.factor(), rank)
            }
        };
        overlap += usize::from(k1.intersect(&k2, tol.tol_eq)?.rank() > 0);
        let r = ctx.generic_position_report(&k1, &k2)?;
        uv_nontrivial += usize::from(r.dim_u_v > 0);
        iff_mismatch += usize::from(r.dim_u_vperp != r.dim_k1_k2perp || r.dim_uperp_v != r.dim_k1perp_k2);
        complement_mismatch += usize::from(r.dim_uperp_vperp != r.expected_uperp_vperp);
        k1_k2perp += usize::from(r.dim_k1_k2perp > 0);
    }
    let mut out = Outcome::new(tol.tol_eq);
    out.count("instances", 50);
    out.count("overlap_instances", overlap);
    out.count("nontrivial_k1_k2perp_instances", k1_k2perp);
    out.count("uv_nontrivial", uv_nontrivial);
    out.count("iff_mismatches", iff_mismatch);
    out.count("complement_mismatches", complement_mismatch);
    let pass = uv_nontrivial == 0 && iff_mismatch == 0 && complement_mismatch == 0 && overlap > 0;
    Ok(out.finish(pass))
}

fn nongeneric_counterexample(config: &LabConfig, rng: &mut LabRng) -> Result<Outcome> {
    let tol = config.tolerances();
    let n = abstract_modes(config).max(2);
    let thermal = ThermalDoubling::new(sample_ground(rng, n, config.model.mass)?, config.thermal.beta)?;
    let ctx = DualityContext::with_real_factor(thermal, tol)?;
    let k = (n / 4).max(1);
    let k1 = random_subspace_within(rng, ctx.factor(), k);
    let k2 = random_subspace_within(rng, ctx.factor(), k);
    let w = ctx.factor().project(&random_vector(rng, 2 * n));
    let r = ctx.nongeneric_counterexample(&k1, &k2, &w)?;
    let reduction = ctx.reduce_to_generic_position(&k1, &k2)?;
    let threshold = 1e-6;
    let mut out = Outcome::new(threshold);
    out.count("modes", n);
    out.set("witness_distance", r.witness_distance);
    out.set("residual", r.residual);
    for (name, d) in ["reduced_u_v", "reduced_u_vperp", "reduced_uperp_v", "reduced_uperp_vperp"]
        .iter()
        .zip(reduction.intersection_dims)
    {
        out.count(name, d);
    }
    Ok(out.finish(r.residual > threshold))
}

fn modular_data(config: &LabConfig) -> Result<Outcome> {
    let tol = config.tolerances();
    let lt = LocalThermal::new(config.field_model()?, config.thermal.beta, tol)?;
    let r = lt.context().modular_report()?;
    let mut out = Outcome::new(tol.tol_eq);
    out.set("delta_rel_error", r.delta_rel_error);
    out.set("j_rel_error", r.j_rel_error);
    out.set("j_involution", r.j_involution);
    out.set("j_antilinear", r.j_antilinear);
    out.set("delta_linear", r.delta_linear);
    out.set("tomita_fixed_residual", r.tomita_fixed_residual);
    out.set("jh_max_angle", r.jh_comparison.max_angle);
    out.count("jh_rank", r.jh_comparison.rank_left);
    out.set("condition", r.condition);
    out.set("near_degenerate", if r.near_degenerate { 1.0 } else { 0.0 });
    Ok(out.finish(r.pass))
}

fn propagator_identities(config: &LabConfig) -> Result<Outcome> {
    let model = config.field_model()?;
    let grid = model.time_grid();
    let (l, t_ext) = (model.length(), grid.extent);
    let mid = 0.5 * l;
    let source = TestFunction::bump(&model, &BumpSpec::gaussian(0.02 * t_ext, t_ext / 32.0, 0.4 * l, l / 16.0));
    let sol = causal_propagator(&model, &source)?;

    let value = sol.field_at(&model, 0.0);
    let expected_value = model.delta1(&model.k_infty(&source.antisymmetric_part()));
    let initial_value = relative_error(&value, &expected_value);
    let minus_velocity: Vec<f64> = sol.velocity_field_at(&model, 0.0).iter().map(|v| -v).collect();
    let expected_velocity = model.delta0(&model.k_infty(&source.symmetric_part()));
    let initial_velocity = relative_error(&minus_velocity, &expected_velocity);

    let p_after_e = sol.klein_gordon_residual(&grid.times());
    let mut e_after_p = 0.0f64;
    for (shape, width) in [(BumpShape::Gaussian, t_ext / 20.0), (BumpShape::Smooth, 0.4 * t_ext)] {
        let spec = BumpSpec {
            amplitude: 1.0,
            t_center: -0.025 * t_ext,
            t_width: width,
            x_center: 0.3 * l,
            x_width: l / 10.0,
            shape,
        };
        e_after_p = e_after_p.max(propagator_annihilates_klein_gordon(&model, &spec));
    }

    let gaussian_data = |shift: f64, width2: f64, odd: bool| -> Vec<f64> {
        (0..model.n_points())
            .map(|j| {
                let x = model.position(j);
                let r2: f64 = x.iter().map(|xi| (xi - mid + shift).powi(2)).sum();
                let odd_factor = if odd { -(x[0] - mid + shift) } else { 1.0 };
                odd_factor * (-r2 / width2).exp()
            })
            .collect()
    };
    let f = gaussian_data(0.0, 2.0, false);
    let g = gaussian_data(1.0, 3.0, true);
    let c1 = Cutoff {
        center: -0.2 * t_ext,
        width: t_ext / 32.0,
    };
    let c2 = Cutoff {
        center: 0.125 * t_ext,
        width: t_ext / 40.0,
    };
    let e1 = causal_propagator(&model, &source_from_initial_data(&model, &f, &g, c1)?)?;
    let e2 = causal_propagator(&model, &source_from_initial_data(&model, &f, &g, c2)?)?;
    let round_trip = relative_error(&e1.field_at(&model, 0.0), &f).max(relative_error(&e1.velocity_field_at(&model, 0.0), &g));
    let cutoff_independence = [-0.25 * t_ext, 0.0, 0.22 * t_ext]
        .iter()
        .map(|&t| relative_error(&e1.field_at(&model, t), &e2.field_at(&model, t)))
        .fold(0.0, f64::max);

    let mut out = Outcome::new(1e-8);
    out.set("initial_value", initial_value);
    out.set("initial_velocity", initial_velocity);
    out.set("e_after_p", e_after_p);
    out.set("p_after_e", p_after_e);
    out.set("round_trip", round_trip);
    out.set("cutoff_independence", cutoff_independence);
    let pass = initial_value < 1e-8
        && initial_velocity < 1e-8
        && e_after_p < 1e-9
        && p_after_e < 1e-9
        && round_trip < 1e-8
        && cutoff_independence < 1e-8;
    Ok(out.finish(pass))
}

fn araki_duality(config: &LabConfig) -> Result<Outcome> {
    let tol = config.tolerances();
    let model = config.field_model()?;
    let region = config.region(&model)?;
    let r = araki_duality_check(&model, &region, &tol)?;
    let mut out = Outcome::new(tol.tol_eq);
    out.count("region_size", r.region_size);
    out.count("n_points", r.n_points);
    out.set("real_max_angle", r.real_part.max_angle);
    out.count("real_rank_left", r.real_part.rank_left);
    out.count("real_rank_right", r.real_part.rank_right);
    out.set("imaginary_max_angle", r.imaginary_part.max_angle);
    out.count("imaginary_rank_left", r.imaginary_part.rank_left);
    out.count("imaginary_rank_right", r.imaginary_part.rank_right);
    out.set("gram_block", r.gram_block);
    Ok(out.finish(r.pass))
}

fn haag_duality(config: &LabConfig) -> Result<Outcome> {
    let tol = config.tolerances();
    let model = config.field_model()?;
    let region = config.region(&model)?;
    let lt = LocalThermal::new(model, config.thermal.beta, tol)?;
    let r = lt.haag_duality_check(&region)?;
    let mut out = Outcome::new(tol.tol_eq);
    out.count("region_size", r.region_size);
    for (prefix, c) in [("u_complement", r.u_complement), ("v_complement", r.v_complement), ("assembled", r.assembled)] {
        out.set(&format!("{prefix}_max_angle"), c.max_angle);
        out.count(&format!("{prefix}_rank_left"), c.rank_left);
        out.count(&format!("{prefix}_rank_right"), c.rank_right);
    }
    Ok(out.finish(r.pass))
}

fn standardness(config: &LabConfig) -> Result<Outcome> {
    let tol = config.tolerances();
    let model = config.field_model()?;
    let region = config.region(&model)?;
    let lt = LocalThermal::new(model, config.thermal.beta, tol)?;
    let global = lt.standardness_report(None)?;
    let local = lt.standardness_report(Some(&region))?;
    let mut out = Outcome::new(tol.tol_eq);
    for (prefix, r) in [("global", global), ("local", local)] {
        out.count(&format!("{prefix}_rank"), r.rank);
        out.count(&format!("{prefix}_separating_dim"), r.separating_dim);
        out.count(&format!("{prefix}_span_rank"), r.span_rank);
        out.count(&format!("{prefix}_deficit"), r.deficit);
        out.count(&format!("{prefix}_expected_deficit"), r.expected_deficit);
    }
    out.count("ambient", global.ambient);
    Ok(out.finish(global.pass && local.pass && global.span_rank == global.ambient))
}

fn random_label(rng: &mut LabRng, dim: usize) -> DVector<f64> {
    random_vector(rng, dim).normalize()
}

fn weyl_relations(config: &LabConfig, rng: &mut LabRng) -> Result<Outcome> {
    let tol = 1e-12;
    let model = config.field_model()?;
    let ground = model.ground();
    let thermal = ThermalDoubling::new(ground.clone(), config.thermal.beta)?;
    let space = model.space();
    let dim = space.real_dim();

    let mut relations = 0.0f64;
    for _ in 0..20 {
        let (f, g, h) = (random_label(rng, dim), random_label(rng, dim), random_label(rng, dim));
        let r = weyl_relation_report(&f, &g, &h, &space, tol);
        relations = relations
            .max(r.star)
            .max(r.product)
            .max(r.unit)
            .max(r.associativity)
            .max(r.anti_multiplicative);
    }

    let words: Vec<WeylWord> = (0..8)
        .map(|i| WeylWord::with_phase(0.37 * i as f64, random_label(rng, dim)))
        .collect();
    let canonical = segal_round_trip(&SegalSplitting::canonical(space.clone()), &words, tol);
    let field_form = segal_round_trip(&SegalSplitting::new(space.clone(), model.real_factor())?, &words, tol);
    let segal = [canonical, field_form]
        .iter()
        .map(|r| r.weyl.max(r.segal).max(r.product))
        .fold(0.0, f64::max);
    let decomposition = canonical.decomposition.max(field_form.decomposition);

    let mut positivity = f64::INFINITY;
    let mut cauchy_schwarz = f64::INFINITY;
    for _ in 0..10 {
        let ws: Vec<WeylWord> = (0..4).map(|_| WeylWord::generator(random_label(rng, dim))).collect();
        for state in [QuasifreeState::Ground(&ground), QuasifreeState::Thermal(&thermal)] {
            positivity = positivity.min(positivity_report(&ws, state, &space, tol)?.min_eigenvalue);
            let w = &ws[0];
            let lhs = evaluate_quasifree(&weyl_multiply(&weyl_star(w), w, &space), state)?.re;
            let rhs = evaluate_quasifree(w, state)?.norm_sqr();
            cauchy_schwarz = cauchy_schwarz.min(lhs - rhs);
        }
    }

    let w = WeylWord::with_phase(0.5, random_label(rng, dim));
    let (s, t) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
    let group_law = free_dynamics(&free_dynamics(&w, s, &ground), t, &ground)
        .distance(&free_dynamics(&w, s + t, &ground))
        .max(free_dynamics(&free_dynamics(&w, t, &ground), -t, &ground).distance(&w));

    let (f, g) = (random_label(rng, dim), random_label(rng, dim));
    let sigma = space.symplectic(&f, &g);
    let (ft, gt) = (
        free_dynamics(&WeylWord::generator(f), 1.7, &ground),
        free_dynamics(&WeylWord::generator(g), 1.7, &ground),
    );
    let symplectomorphism = (space.symplectic(ft.label(), gt.label()) - sigma).abs();

    let mut out = Outcome::new(tol);
    out.set("relations", relations);
    out.set("segal_round_trip", segal);
    out.set("segal_decomposition", decomposition);
    out.set("gram_min_eigenvalue", positivity);
    out.set("cauchy_schwarz_margin", cauchy_schwarz);
    out.set("group_law", group_law);
    out.set("symplectomorphism", symplectomorphism);
    let pass = relations < tol
        && segal < tol
        && decomposition < 1e-10
        && positivity > -tol
        && cauchy_schwarz >= -tol
        && group_law < 1e-10
        && symplectomorphism < 1e-9;
    Ok(out.finish(pass))
}

fn weyl_kms(config: &LabConfig, rng: &mut LabRng) -> Result<Outcome> {
    let tol = 1e-8;
    let model = config.field_model()?;
    let thermal = ThermalDoubling::new(model.ground(), config.thermal.beta)?;
    let (l, t_ext) = (model.length(), model.time_grid().extent);
    let times: Vec<f64> = (0..25).map(|i| -3.0 + 0.25 * i as f64).collect();
    let bump = |rng: &mut LabRng| {
        let spec = BumpSpec {
            amplitude: 0.5,
            ..BumpSpec::gaussian(
                rng.random_range(-0.1..0.1) * t_ext,
                t_ext / 32.0,
                rng.random_range(0.2..0.8) * l,
                l / 16.0,
            )
        };
        WeylWord::from_test_function(&model, &TestFunction::bump(&model, &spec))
    };
    let mut worst = 0.0f64;
    let mut consistency = 0.0f64;
    let state = QuasifreeState::Thermal(&thermal);
    for _ in 0..5 {
        let (f, g) = (bump(rng), bump(rng));
        worst = worst.max(kms_boundary_check(f.label(), g.label(), &thermal, &times, tol)?.relative_deviation);
        let u = model.space().derealify(f.label());
        let weighted: f64 = (0..thermal.n_modes())
            .map(|k| (thermal.sinh_weights()[k].powi(2) + thermal.cosh_weights()[k].powi(2)) * u[k].norm_sqr())
            .sum();
        let value = evaluate_quasifree(&f, state)?;
        consistency = consistency.max((-2.0 * value.re.ln() - weighted).abs() / weighted.max(1e-300));
    }
    let f = bump(rng);
    let trivial = kms_boundary_check(f.label(), &DVector::zeros(f.label().len()), &thermal, &times, tol)?;

    // single mode with a real label, where c² = s² e^{βω} closes the identity
    let single = GroundStructure::new(DVector::from_element(1, config.model.mass), config.model.mass)?;
    let single = ThermalDoubling::new(single, config.thermal.beta)?;
    let label = DVector::from_vec(vec![0.6, 0.0]);
    let single_mode = kms_boundary_check(&label, &label, &single, &times, tol)?.relative_deviation;

    // F(t) = ω(W(f) α_t W(g)) agrees with the product of words at real t
    let (f, g) = (bump(rng), bump(rng));
    let two_point = WeylTwoPoint::new(f.label(), g.label(), &thermal)?;
    let space = model.space();
    let closed_form = times
        .iter()
        .map(|&t| {
            let word = weyl_multiply(&f, &free_dynamics(&g, t, thermal.ground()), &space);
            let direct = evaluate_quasifree(&word, state).unwrap_or(Complex::new(f64::NAN, 0.0));
            (direct - two_point.f(Complex::new(t, 0.0))).norm() / direct.norm().max(1e-300)
        })
        .fold(0.0, f64::max);
    let sigma_check = (space.symplectic(f.label(), g.label()) - 2.0 * inner(&space.derealify(f.label()), &space.derealify(g.label())).im).abs();

    let mut out = Outcome::new(tol);
    out.count("pairs", 5);
    out.count("times", times.len());
    out.set("max_relative_deviation", worst);
    out.set("trivial_deviation", trivial.max_deviation);
    out.set("single_mode_deviation", single_mode);
    out.set("state_consistency", consistency);
    out.set("closed_form_mismatch", closed_form);
    out.set("sigma_convention", sigma_check);
    let pass = worst < tol
        && trivial.max_deviation == 0.0
        && single_mode < 1e-10
        && consistency < 1e-10
        && closed_form < 1e-10
        && sigma_check < 1e-12;
    Ok(out.finish(pass))
}
