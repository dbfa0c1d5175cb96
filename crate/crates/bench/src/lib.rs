//! Shared fixtures for the benchmarks.

use mdlab_core::field::{BumpSpec, FieldModel, Region, TestFunction, TimeGrid};

pub fn line_model(n: usize) -> FieldModel {
    FieldModel::line(n, 20.0, 1.0, TimeGrid { points: 401, extent: 16.0 }).expect("valid model")
}

pub fn half_box(model: &FieldModel) -> Region {
    Region::centered(model, 0.5 * model.length(), 0.25 * model.length()).expect("valid region")
}

pub fn bump(model: &FieldModel) -> TestFunction {
    TestFunction::bump(model, &BumpSpec::gaussian(0.3, 0.5, 0.4 * model.length(), 1.5))
}
