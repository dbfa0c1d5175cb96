//! Causal propagator of the Klein–Gordon operator, evaluated mode by mode.
//!
//! With `P = -(∂_t² + ω²)` on each spatial mode,
//! `(Eh)_k(t) = τ Σ_n sin(ω_k (t_n - t)) / ω_k · ĥ_k(t_n)`. This sign makes
//! `(Eh)(0) = δ₁h₋` and `-∂_t(Eh)(0) = δ₀h₊` hold exactly on a symmetric time
//! grid.

use nalgebra::{DMatrix, DVector};

use super::test_function::{BumpShape, BumpSpec};
use super::{FieldModel, TestFunction};
use crate::{Complex, Error, Result};

/// Homogeneous solution `φ_k(t) = A_k cos(ω_k t) + B_k sin(ω_k t)` in
/// spatial-transform coordinates.
#[derive(Debug, Clone)]
pub struct Solution {
    cos_coeff: DVector<Complex>,
    sin_coeff: DVector<Complex>,
    omega: DVector<f64>,
}

impl Solution {
    /// Solution with `φ(0) = f` and `∂_tφ(0) = g`.
    pub fn from_initial_data(model: &FieldModel, f: &[f64], g: &[f64]) -> Self {
        let omega = model.omega().clone();
        let ghat = model.spatial_transform(g);
        Self {
            cos_coeff: model.spatial_transform(f),
            sin_coeff: DVector::from_fn(ghat.len(), |k, _| ghat[k] / omega[k]),
            omega,
        }
    }

    pub fn modes_at(&self, t: f64) -> DVector<Complex> {
        DVector::from_fn(self.omega.len(), |k, _| {
            let (s, c) = (self.omega[k] * t).sin_cos();
            self.cos_coeff[k] * c + self.sin_coeff[k] * s
        })
    }

    pub fn velocity_at(&self, t: f64) -> DVector<Complex> {
        DVector::from_fn(self.omega.len(), |k, _| {
            let w = self.omega[k];
            let (s, c) = (w * t).sin_cos();
            (self.sin_coeff[k] * c - self.cos_coeff[k] * s) * w
        })
    }

    fn acceleration_at(&self, t: f64) -> DVector<Complex> {
        DVector::from_fn(self.omega.len(), |k, _| -self.modes_at(t)[k] * self.omega[k].powi(2))
    }

    pub fn field_at(&self, model: &FieldModel, t: f64) -> Vec<f64> {
        model.inverse_transform(&self.modes_at(t))
    }

    pub fn velocity_field_at(&self, model: &FieldModel, t: f64) -> Vec<f64> {
        model.inverse_transform(&self.velocity_at(t))
    }

    /// `max |(∂_t² + ω²)φ_k(t)| / max |ω² φ_k(t)|` over the given times.
    pub fn klein_gordon_residual(&self, times: &[f64]) -> f64 {
        let (mut num, mut den) = (0.0f64, 0.0f64);
        for &t in times {
            let phi = self.modes_at(t);
            let acc = self.acceleration_at(t);
            for k in 0..phi.len() {
                let w2 = self.omega[k].powi(2);
                num = num.max((acc[k] + phi[k] * w2).norm());
                den = den.max((phi[k] * w2).norm());
            }
        }
        if den > 0.0 {
            num / den
        } else {
            num
        }
    }

    /// Largest mode amplitude.
    pub fn max_amplitude(&self) -> f64 {
        self.cos_coeff
            .iter()
            .chain(self.sin_coeff.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Spatial transforms of every time slice: `M × n_modes`.
pub fn mode_series(model: &FieldModel, h: &TestFunction) -> DMatrix<Complex> {
    let m = model.time_grid().points;
    let mut out = DMatrix::from_element(m, model.n_points(), Complex::new(0.0, 0.0));
    for n in 0..m {
        let row = h.time_slice(n);
        if row.iter().all(|&v| v == 0.0) {
            continue;
        }
        out.row_mut(n).copy_from(&model.spatial_transform(&row).transpose());
    }
    out
}

/// `E` applied to a source given by its mode series.
pub fn propagate_modes(model: &FieldModel, series: &DMatrix<Complex>) -> Solution {
    let grid = model.time_grid();
    let tau = grid.spacing();
    let omega = model.omega().clone();
    let modes = omega.len();
    let mut cos_coeff = DVector::from_element(modes, Complex::new(0.0, 0.0));
    let mut sin_coeff = cos_coeff.clone();
    for n in 0..grid.points {
        let t = grid.time(n);
        for k in 0..modes {
            let h = series[(n, k)];
            if h == Complex::new(0.0, 0.0) {
                continue;
            }
            let (s, c) = (omega[k] * t).sin_cos();
            cos_coeff[k] += h * (tau * s / omega[k]);
            sin_coeff[k] -= h * (tau * c / omega[k]);
        }
    }
    Solution {
        cos_coeff,
        sin_coeff,
        omega,
    }
}

/// `Eh` for a source supported strictly inside the time grid.
pub fn causal_propagator(model: &FieldModel, h: &TestFunction) -> Result<Solution> {
    if let Some(time) = h.boundary_support(model) {
        return Err(Error::SupportAtBoundary { time });
    }
    Ok(propagate_modes(model, &mode_series(model, h)))
}

/// `σ(f, g) = a^d τ Σ_{n,j} f(t_n, x_j) (Eg)(t_n, x_j)`.
pub fn symplectic_pairing(model: &FieldModel, f: &TestFunction, g: &TestFunction) -> Result<f64> {
    let eg = causal_propagator(model, g)?;
    let grid = model.time_grid();
    let mut sum = 0.0;
    for n in 0..grid.points {
        let row = f.time_slice(n);
        if row.iter().all(|&v| v == 0.0) {
            continue;
        }
        let field = eg.field_at(model, grid.time(n));
        sum += row.iter().zip(&field).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(sum * model.cell_volume() * grid.spacing())
}

/// Klein–Gordon image `P g` of a separable bump `g = b(t) φ(x)`, computed
/// from the analytic time derivatives of `b`.
pub fn klein_gordon_of_bump(model: &FieldModel, spec: &BumpSpec) -> DMatrix<Complex> {
    let grid = model.time_grid();
    let phi_hat = model.spatial_transform(&spec.spatial_profile(model));
    let omega = model.omega();
    DMatrix::from_fn(grid.points, model.n_points(), |n, k| {
        let r = (grid.time(n) - spec.t_center) / spec.t_width;
        let (b, _, b2) = spec.shape.derivatives(r);
        let b2 = b2 / (spec.t_width * spec.t_width);
        -phi_hat[k] * (b2 + omega[k] * omega[k] * b)
    })
}

/// `‖E(Pg)‖` relative to the size of the cancelling terms, for a separable bump `g`.
pub fn propagator_annihilates_klein_gordon(model: &FieldModel, spec: &BumpSpec) -> f64 {
    let series = klein_gordon_of_bump(model, spec);
    let sol = propagate_modes(model, &series);
    let tau = model.time_grid().spacing();
    let scale = (0..series.ncols())
        .map(|k| tau * series.column(k).iter().map(|z| z.norm()).sum::<f64>() / model.omega()[k])
        .fold(0.0, f64::max);
    if scale > 0.0 {
        sol.max_amplitude() / scale
    } else {
        sol.max_amplitude()
    }
}

/// Smooth step `χ` whose derivative is a Gaussian of the given width,
/// treated as supported on `[center - 8 width, center + 8 width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub center: f64,
    pub width: f64,
}

impl Cutoff {
    pub fn window(&self) -> (f64, f64) {
        (self.center - 8.0 * self.width, self.center + 8.0 * self.width)
    }

    /// `(χ'(t), χ''(t))`.
    fn derivatives(&self, t: f64) -> (f64, f64) {
        let (g, g1, _) = BumpShape::Gaussian.derivatives((t - self.center) / self.width);
        let norm = 1.0 / (self.width * (2.0 * std::f64::consts::PI).sqrt());
        (norm * g, norm * g1 / self.width)
    }
}

/// `h = P(χ φ) = -(χ'' φ + 2 χ' ∂_tφ)` where `φ` solves the field equation
/// with data `(f, g)` at `t = 0`; then `Eh = φ`.
pub fn source_from_initial_data(model: &FieldModel, f: &[f64], g: &[f64], cutoff: Cutoff) -> Result<TestFunction> {
    let grid = model.time_grid();
    let (lo, hi) = cutoff.window();
    if !(cutoff.width > 0.0) {
        return Err(Error::invalid("cutoff", "width must be positive"));
    }
    if lo <= grid.time(0) {
        return Err(Error::SupportAtBoundary { time: lo });
    }
    if hi >= grid.time(grid.points - 1) {
        return Err(Error::SupportAtBoundary { time: hi });
    }
    let phi = Solution::from_initial_data(model, f, g);
    let mut samples = DMatrix::zeros(grid.points, model.n_points());
    for n in 0..grid.points {
        let t = grid.time(n);
        if t < lo || t > hi {
            continue;
        }
        let (d1, d2) = cutoff.derivatives(t);
        let modes = phi.modes_at(t);
        let vel = phi.velocity_at(t);
        let h = DVector::from_fn(modes.len(), |k, _| -(modes[k] * d2 + vel[k] * (2.0 * d1)));
        let row = model.inverse_transform(&h);
        for (j, v) in row.into_iter().enumerate() {
            samples[(n, j)] = v;
        }
    }
    TestFunction::from_samples(model, samples)
}

/// Relative sup-norm distance between two grid functions.
pub fn relative_error(actual: &[f64], expected: &[f64]) -> f64 {
    let scale = expected.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let err = actual
        .iter()
        .zip(expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::TimeGrid;
    use crate::random::{random_vector, seeded_rng};

    fn model(n: usize) -> FieldModel {
        FieldModel::line(n, 20.0, 1.0, TimeGrid { points: 801, extent: 16.0 }).unwrap()
    }

    fn source(m: &FieldModel) -> TestFunction {
        TestFunction::bump(m, &BumpSpec::gaussian(0.3, 0.5, 8.0, 1.5))
    }

    #[test]
    fn initial_data_identities() {
        let m = model(64);
        let h = source(&m);
        let sol = causal_propagator(&m, &h).unwrap();
        let value = sol.field_at(&m, 0.0);
        let expected = m.delta1(&m.k_infty(&h.antisymmetric_part()));
        assert!(relative_error(&value, &expected) < 1e-10);
        let minus_velocity: Vec<f64> = sol.velocity_field_at(&m, 0.0).iter().map(|v| -v).collect();
        let expected = m.delta0(&m.k_infty(&h.symmetric_part()));
        assert!(relative_error(&minus_velocity, &expected) < 1e-10);
    }

    #[test]
    fn symmetric_source_has_zero_initial_value() {
        let m = model(32);
        let h = source(&m).symmetric_part();
        let sol = causal_propagator(&m, &h).unwrap();
        let v = sol.field_at(&m, 0.0);
        let scale = sol.max_amplitude();
        assert!(v.iter().all(|x| x.abs() < 1e-13 * scale.max(1.0)));
    }

    #[test]
    fn klein_gordon_identities() {
        let m = model(64);
        let sol = causal_propagator(&m, &source(&m)).unwrap();
        assert!(sol.klein_gordon_residual(&m.time_grid().times()) < 1e-12);
        for shape in [BumpShape::Gaussian, BumpShape::Smooth] {
            let spec = BumpSpec {
                amplitude: 1.0,
                t_center: -0.4,
                t_width: if shape == BumpShape::Gaussian { 0.5 } else { 3.0 },
                x_center: 6.0,
                x_width: 2.0,
                shape,
            };
            let r = propagator_annihilates_klein_gordon(&m, &spec);
            assert!(r < 1e-9, "{shape:?}: {r:e}");
        }
    }

    #[test]
    fn boundary_support_is_rejected() {
        let m = model(16);
        let h = TestFunction::bump(&m, &BumpSpec::gaussian(7.5, 0.5, 8.0, 1.5));
        assert!(matches!(causal_propagator(&m, &h), Err(Error::SupportAtBoundary { .. })));
    }

    #[test]
    fn source_round_trip_and_cutoff_independence() {
        let m = model(64);
        let f: Vec<f64> = (0..64)
            .map(|j| {
                let x = m.position(j)[0] - 10.0;
                (-x * x / 2.0).exp()
            })
            .collect();
        let g: Vec<f64> = (0..64)
            .map(|j| {
                let x = m.position(j)[0] - 9.0;
                -x * (-x * x / 3.0).exp()
            })
            .collect();
        let h1 = source_from_initial_data(&m, &f, &g, Cutoff { center: -3.0, width: 0.5 }).unwrap();
        let h2 = source_from_initial_data(&m, &f, &g, Cutoff { center: 2.0, width: 0.4 }).unwrap();
        let e1 = causal_propagator(&m, &h1).unwrap();
        let e2 = causal_propagator(&m, &h2).unwrap();
        assert!(relative_error(&e1.field_at(&m, 0.0), &f) < 1e-8);
        assert!(relative_error(&e1.velocity_field_at(&m, 0.0), &g) < 1e-8);
        for t in [-4.0, 0.0, 3.5] {
            assert!(relative_error(&e1.field_at(&m, t), &e2.field_at(&m, t)) < 1e-8);
        }

        let zero = vec![0.0; 64];
        let h0 = source_from_initial_data(&m, &zero, &zero, Cutoff { center: 0.0, width: 0.5 }).unwrap();
        assert_eq!(causal_propagator(&m, &h0).unwrap().max_amplitude(), 0.0);
        assert!(source_from_initial_data(&m, &f, &g, Cutoff { center: -7.0, width: 0.5 }).is_err());
    }

    #[test]
    fn sigma_matches_one_particle_pairing() {
        let m = model(32);
        let mut rng = seeded_rng(50);
        for _ in 0..3 {
            let c = random_vector(&mut rng, 4);
            let f = TestFunction::bump(&m, &BumpSpec::gaussian(c[0], 0.5, 10.0 + 2.0 * c[1], 1.3));
            let g = TestFunction::bump(&m, &BumpSpec::gaussian(c[2], 0.6, 10.0 + 2.0 * c[3], 1.1));
            let sigma = symplectic_pairing(&m, &f, &g).unwrap();
            let im = 2.0 * crate::quasifree::inner(&m.k_infty(&f), &m.k_infty(&g)).im;
            assert!((sigma - im).abs() < 1e-6 * im.abs().max(1e-3), "{sigma} vs {im}");
        }
    }
}
