//! Real test functions sampled on the spacetime grid.

use std::io::Read;

use nalgebra::DMatrix;

use super::FieldModel;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    samples: DMatrix<f64>,
}

impl TestFunction {
    pub fn zeros(model: &FieldModel) -> Self {
        Self {
            samples: DMatrix::zeros(model.time_grid().points, model.n_points()),
        }
    }

    /// Rows are time steps, columns are flattened spatial points.
    pub fn from_samples(model: &FieldModel, samples: DMatrix<f64>) -> Result<Self> {
        let expected = (model.time_grid().points, model.n_points());
        if samples.shape() != expected {
            return Err(Error::DimensionMismatch {
                expected: expected.0 * expected.1,
                found: samples.len(),
            });
        }
        Ok(Self { samples })
    }

    pub fn from_fn(model: &FieldModel, f: impl Fn(f64, &[f64]) -> f64) -> Self {
        let grid = model.time_grid();
        let positions: Vec<Vec<f64>> = (0..model.n_points()).map(|j| model.position(j)).collect();
        let samples = DMatrix::from_fn(grid.points, model.n_points(), |n, j| f(grid.time(n), &positions[j]));
        Self { samples }
    }

    pub fn bump(model: &FieldModel, spec: &BumpSpec) -> Self {
        let grid = model.time_grid();
        let profile = spec.spatial_profile(model);
        let samples = DMatrix::from_fn(grid.points, model.n_points(), |n, j| {
            spec.amplitude * spec.shape.value((grid.time(n) - spec.t_center) / spec.t_width) * profile[j]
        });
        Self { samples }
    }

    pub fn time_points(&self) -> usize {
        self.samples.nrows()
    }

    pub fn space_points(&self) -> usize {
        self.samples.ncols()
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn time_slice(&self, n: usize) -> Vec<f64> {
        self.samples.row(n).iter().copied().collect()
    }

    fn reflected(&self, sign: f64) -> Self {
        let m = self.time_points();
        let samples = DMatrix::from_fn(m, self.space_points(), |n, j| {
            0.5 * (self.samples[(n, j)] + sign * self.samples[(m - 1 - n, j)])
        });
        Self { samples }
    }

    /// `f₊(t, x) = (f(t, x) + f(-t, x)) / 2`.
    pub fn symmetric_part(&self) -> Self {
        self.reflected(1.0)
    }

    /// `f₋(t, x) = (f(t, x) - f(-t, x)) / 2`.
    pub fn antisymmetric_part(&self) -> Self {
        self.reflected(-1.0)
    }

    pub fn add(&self, other: &TestFunction) -> Self {
        Self {
            samples: &self.samples + &other.samples,
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            samples: &self.samples * c,
        }
    }

    /// `f(t - steps·τ, x)`. Fails if nonzero samples would leave the grid.
    pub fn time_shift(&self, model: &FieldModel, steps: i64) -> Result<Self> {
        let m = self.time_points() as i64;
        let mut samples = DMatrix::zeros(self.time_points(), self.space_points());
        for n in 0..m {
            let target = n + steps;
            let row = self.samples.row(n as usize);
            if !(0..m).contains(&target) {
                if row.iter().any(|&v| v != 0.0) {
                    return Err(Error::SupportAtBoundary {
                        time: model.time_grid().time(n as usize),
                    });
                }
                continue;
            }
            samples.row_mut(target as usize).copy_from(&row);
        }
        Ok(Self { samples })
    }

    /// Time of the first boundary slice carrying a nonzero sample, if any.
    pub fn boundary_support(&self, model: &FieldModel) -> Option<f64> {
        let last = self.time_points() - 1;
        [0, last]
            .into_iter()
            .find(|&n| self.samples.row(n).iter().any(|&v| v != 0.0))
            .map(|n| model.time_grid().time(n))
    }

    /// Spatial points where the function is nonzero at some time.
    pub fn spatial_support(&self) -> Vec<bool> {
        (0..self.space_points())
            .map(|j| self.samples.column(j).iter().any(|&v| v != 0.0))
            .collect()
    }

    /// Reads `t, x, value` rows (`t, x0, …, x{d-1}, value` when `d > 1`);
    /// coordinates must sit on grid points. Missing points are zero.
    pub fn from_csv<R: Read>(model: &FieldModel, reader: R) -> Result<Self> {
        let d = model.spatial_dim();
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
        let expected: Vec<String> = if d == 1 {
            vec!["t".into(), "x".into(), "value".into()]
        } else {
            std::iter::once("t".to_string())
                .chain((0..d).map(|i| format!("x{i}")))
                .chain(std::iter::once("value".to_string()))
                .collect()
        };
        if headers.iter().collect::<Vec<_>>() != expected.iter().map(String::as_str).collect::<Vec<_>>() {
            return Err(Error::Parse(format!("expected columns {}", expected.join(","))));
        }
        let grid = model.time_grid();
        let n = model.points_per_axis();
        let mut out = Self::zeros(model);
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::Parse(e.to_string()))?;
            let nums: Vec<f64> = record
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("row {}: {e}", line + 1)))?;
            let t_index = grid_index(nums[0] - grid.time(0), grid.spacing(), grid.points)
                .ok_or_else(|| Error::Parse(format!("row {}: t = {} is not a grid time", line + 1, nums[0])))?;
            let mut flat = 0;
            for &x in &nums[1..=d] {
                let j = grid_index(x, model.spacing(), n)
                    .ok_or_else(|| Error::Parse(format!("row {}: x = {x} is not a grid point", line + 1)))?;
                flat = flat * n + j;
            }
            out.samples[(t_index, flat)] = nums[d + 1];
        }
        Ok(out)
    }
}

fn grid_index(offset: f64, spacing: f64, len: usize) -> Option<usize> {
    let r = offset / spacing;
    let i = r.round();
    if (r - i).abs() > 1e-6 || i < 0.0 || i >= len as f64 {
        return None;
    }
    Some(i as usize)
}

/// Signed offset reduced to `[-L/2, L/2)`.
pub(crate) fn periodic_offset(dx: f64, length: f64) -> f64 {
    dx - length * (dx / length + 0.5).floor()
}

/// Bump profiles in the scaled variable `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BumpShape {
    /// `e^{-r²/2}`, cut off at `|r| = 8`.
    Gaussian,
    /// `(1 - r²)^order` on `|r| < 1`.
    Polynomial { order: u32 },
    /// `exp(1 - 1/(1 - r²))` on `|r| < 1`.
    Smooth,
}

impl BumpShape {
    pub fn value(&self, r: f64) -> f64 {
        self.derivatives(r).0
    }

    /// Value and first two derivatives with respect to `r`.
    pub fn derivatives(&self, r: f64) -> (f64, f64, f64) {
        match *self {
            BumpShape::Gaussian => {
                if r.abs() > 8.0 {
                    return (0.0, 0.0, 0.0);
                }
                let g = (-0.5 * r * r).exp();
                (g, -r * g, (r * r - 1.0) * g)
            }
            BumpShape::Polynomial { order } => {
                if r.abs() >= 1.0 {
                    return (0.0, 0.0, 0.0);
                }
                let q = 1.0 - r * r;
                let k = order as i32;
                let f = q.powi(k);
                if k == 0 {
                    return (f, 0.0, 0.0);
                }
                let d1 = -2.0 * r * k as f64 * q.powi(k - 1);
                let d2 = if k == 1 {
                    -2.0
                } else {
                    -2.0 * k as f64 * q.powi(k - 1) + 4.0 * r * r * (k * (k - 1)) as f64 * q.powi(k - 2)
                };
                (f, d1, d2)
            }
            BumpShape::Smooth => {
                if r.abs() >= 1.0 {
                    return (0.0, 0.0, 0.0);
                }
                let q = 1.0 - r * r;
                let b = (1.0 - 1.0 / q).exp();
                let g1 = -2.0 * r / (q * q);
                let g2 = -2.0 / (q * q) - 8.0 * r * r / (q * q * q);
                (b, b * g1, b * (g1 * g1 + g2))
            }
        }
    }
}

/// Product bump `A · b((t - t_c)/w_t) · Π_i b(|x_i - x_c| / w_x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec {
    pub amplitude: f64,
    pub t_center: f64,
    pub t_width: f64,
    pub x_center: f64,
    pub x_width: f64,
    pub shape: BumpShape,
}

impl BumpSpec {
    /// `Π_i b(|x_i - x_c| / w_x)` on the spatial grid, without the amplitude.
    pub fn spatial_profile(&self, model: &FieldModel) -> Vec<f64> {
        let l = model.length();
        (0..model.n_points())
            .map(|j| {
                model
                    .position(j)
                    .iter()
                    .map(|&xi| self.shape.value(periodic_offset(xi - self.x_center, l) / self.x_width))
                    .product()
            })
            .collect()
    }

    pub fn gaussian(t_center: f64, t_width: f64, x_center: f64, x_width: f64) -> Self {
        Self {
            amplitude: 1.0,
            t_center,
            t_width,
            x_center,
            x_width,
            shape: BumpShape::Gaussian,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::TimeGrid;
    use crate::Complex;
    use proptest::prelude::*;

    fn model() -> FieldModel {
        FieldModel::line(32, 20.0, 1.0, TimeGrid { points: 401, extent: 16.0 }).unwrap()
    }

    #[test]
    fn parity_decomposition_is_exact() {
        let m = model();
        let f = TestFunction::bump(&m, &BumpSpec::gaussian(0.7, 0.5, 4.0, 1.5));
        let sum = f.symmetric_part().add(&f.antisymmetric_part());
        assert!((sum.samples() - f.samples()).amax() < 1e-15);
        let plus = f.symmetric_part();
        for n in 0..401 {
            assert_eq!(plus.samples()[(n, 3)], plus.samples()[(400 - n, 3)]);
        }
    }

    #[test]
    fn k_infty_of_zero_and_reality() {
        let m = model();
        let zero = TestFunction::zeros(&m);
        assert_eq!(m.k_infty(&zero).norm(), 0.0);
        let f = TestFunction::bump(&m, &BumpSpec::gaussian(0.0, 0.6, 10.0, 1.2));
        let psi = m.k_infty(&f.symmetric_part());
        assert!(m.reality_residual(&psi) < 1e-10 * psi.norm());
        let chi = m.k_infty(&f.antisymmetric_part());
        let rotated = chi.map(|z| z * Complex::new(0.0, -1.0));
        assert!(m.reality_residual(&rotated) < 1e-10 * psi.norm().max(1.0));
    }

    #[test]
    fn time_shift_intertwines_with_phase() {
        let m = model();
        let tau = m.time_grid().spacing();
        let f = TestFunction::bump(&m, &BumpSpec::gaussian(-0.5, 0.4, 5.0, 1.0));
        let steps = 37;
        let shifted = f.time_shift(&m, steps).unwrap();
        let lhs = m.k_infty(&shifted);
        let rhs = m.time_shift_phase(steps as f64 * tau, &m.k_infty(&f));
        assert!((lhs - &rhs).norm() < 1e-9 * rhs.norm());
        // moving the support the other way picks up the conjugate phase
        let back = f.time_shift(&m, -steps).unwrap();
        let rhs = m.time_shift_phase(-(steps as f64) * tau, &m.k_infty(&f));
        assert!((m.k_infty(&back) - &rhs).norm() < 1e-9 * rhs.norm());
    }

    #[test]
    fn time_shift_rejects_leaving_the_grid() {
        let m = model();
        let f = TestFunction::bump(&m, &BumpSpec::gaussian(6.0, 0.2, 5.0, 1.0));
        assert!(matches!(f.time_shift(&m, 200), Err(Error::SupportAtBoundary { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let m = FieldModel::line(4, 4.0, 1.0, TimeGrid { points: 5, extent: 2.0 }).unwrap();
        let data = "t,x,value\n-1.0,0.0,2.5\n0.5,3.0,-1.0\n";
        let f = TestFunction::from_csv(&m, data.as_bytes()).unwrap();
        assert_eq!(f.samples()[(0, 0)], 2.5);
        assert_eq!(f.samples()[(3, 3)], -1.0);
        assert_eq!(f.samples().iter().filter(|v| **v != 0.0).count(), 2);
        assert!(TestFunction::from_csv(&m, "t,x,value\n0.1,0.0,1.0\n".as_bytes()).is_err());
        assert!(TestFunction::from_csv(&m, "time,x,value\n0.0,0.0,1.0\n".as_bytes()).is_err());
        assert!(TestFunction::from_csv(&m, "t,x,value\n0.0,zero,1.0\n".as_bytes()).is_err());
    }

    #[test]
    fn periodic_offset_wraps() {
        assert_eq!(periodic_offset(0.0, 10.0), 0.0);
        assert!((periodic_offset(9.0, 10.0) + 1.0).abs() < 1e-15);
        assert!((periodic_offset(-6.0, 10.0) - 4.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn bump_derivatives_match_finite_differences(r in -0.95f64..0.95, order in 2u32..8) {
            let h = 1e-5;
            for shape in [BumpShape::Gaussian, BumpShape::Polynomial { order }, BumpShape::Smooth] {
                let (_, d1, d2) = shape.derivatives(r);
                let fd1 = (shape.value(r + h) - shape.value(r - h)) / (2.0 * h);
                let fd2 = (shape.value(r + h) - 2.0 * shape.value(r) + shape.value(r - h)) / (h * h);
                let scale = 1.0 + d2.abs();
                prop_assert!((d1 - fd1).abs() < 1e-6 * scale);
                prop_assert!((d2 - fd2).abs() < 1e-3 * scale);
            }
        }
    }
}
