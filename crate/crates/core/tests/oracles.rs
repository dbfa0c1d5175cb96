//! Frozen reference values, computed independently in 30-digit arithmetic.

use approx::assert_relative_eq;
use mdlab_core::duality::DualityContext;
use mdlab_core::field::{FieldModel, TimeGrid};
use mdlab_core::quasifree::{thermal_weights, GroundStructure, ThermalDoubling};
use mdlab_core::{DVector, Tolerances};

const COTH_HALF: f64 = 2.163_953_413_738_652_8;
const S_UNIT: f64 = 0.762_873_978_366_890_2;
const C_UNIT: f64 = 1.257_766_554_997_121_2;
const A_NORM_UNIT: f64 = 2.020_640_533_364_011_4;
const A_BOUND_UNIT: f64 = 2.515_533_109_994_242_5;

fn single_mode(omega: f64, mass: f64, beta: f64) -> ThermalDoubling {
    let ground = GroundStructure::new(DVector::from_element(1, omega), mass).unwrap();
    ThermalDoubling::new(ground, beta).unwrap()
}

#[test]
fn weights_at_unit_temperature_and_frequency() {
    let (s, c) = thermal_weights(1.0);
    assert_relative_eq!(s, S_UNIT, max_relative = 1e-14);
    assert_relative_eq!(c, C_UNIT, max_relative = 1e-14);
    assert_relative_eq!(s * s + c * c, COTH_HALF, max_relative = 1e-14);
}

#[test]
fn operator_a_norm_and_bound_for_gap_mode() {
    let ctx = DualityContext::with_real_factor(single_mode(1.0, 1.0, 1.0), Tolerances::default()).unwrap();
    let r = ctx.operator_a_report();
    assert_relative_eq!(r.norm, A_NORM_UNIT, max_relative = 1e-12);
    assert_relative_eq!(r.bound, A_BOUND_UNIT, max_relative = 1e-14);
    assert!(r.pass);
}

#[test]
fn ring_dispersion_and_weights() {
    let grid = TimeGrid {
        points: 33,
        extent: 4.0,
    };
    let model = FieldModel::line(4, 4.0, 1.0, grid).unwrap();
    assert_relative_eq!(model.omega()[0], 1.0, max_relative = 1e-15);
    assert_relative_eq!(model.omega()[1], 1.862_095_889_118_586_6, max_relative = 1e-14);
    let t = ThermalDoubling::new(model.ground(), 2.0).unwrap();
    assert_relative_eq!(t.sinh_weights()[1], 0.157_255_782_816_608_44, max_relative = 1e-13);
    assert_relative_eq!(t.cosh_weights()[1], 1.012_289_178_658_581, max_relative = 1e-14);
}

#[test]
fn doubled_spectrum_is_symmetric() {
    let t = single_mode(1.5, 1.0, 0.7);
    let mut spec: Vec<f64> = t.doubled_spectrum().iter().copied().collect();
    spec.sort_by(f64::total_cmp);
    assert_eq!(spec, vec![-1.5, 1.5]);
}
