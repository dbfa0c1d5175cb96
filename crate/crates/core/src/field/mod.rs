//! Free massive scalar field on a periodic spatial lattice.
//!
//! Conventions (mostly-plus metric):
//!
//! * spatial points `x_j = j a`, `a = L / N`, on each of `d` axes; grid
//!   functions are flattened row-major with the last axis fastest;
//! * momenta `p_k = 2πk / L` with `k` the signed FFT index;
//! * `f̂(k) = a^d Σ_j f(x_j) e^{-ip·x_j}` and `f(x) = L^{-d} Σ_k f̂(k) e^{ip·x}`;
//! * times `t_n = (n - (M-1)/2) τ`, symmetric about zero, `τ = T / (M-1)`;
//! * `K∞f(k) = τ Σ_n e^{iω_k t_n} f̂(t_n, k)`, the restriction of the
//!   spacetime transform to the mass shell;
//! * one-particle vectors are stored in isometric coordinates
//!   `ψ̃_k = ψ_k / √(2 ω_k L^d)`, so the mass-shell inner product
//!   `L^{-d} Σ conj(ψ_k) φ_k / (2ω_k)` becomes the Euclidean one.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rustfft::{Fft, FftPlanner};

use crate::quasifree::GroundStructure;
use crate::{Complex, Error, RealSubspace, RealifiedSpace, Result};

pub mod local;
pub mod propagator;
pub mod test_function;

pub use local::{ArakiReport, HaagReport, LocalThermal, Region, StandardnessReport};
pub use propagator::{causal_propagator, source_from_initial_data, Cutoff, Solution};
pub use test_function::{BumpShape, BumpSpec, TestFunction};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub points: usize,
    pub extent: f64,
}

impl TimeGrid {
    pub fn spacing(&self) -> f64 {
        self.extent / (self.points - 1) as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        (n as f64 - 0.5 * (self.points - 1) as f64) * self.spacing()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.points).map(|n| self.time(n)).collect()
    }
}

#[derive(Clone)]
struct Fourier {
    n: usize,
    d: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fourier {
    fn new(n: usize, d: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            d,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// Unnormalized transform along every axis.
    fn apply(&self, data: &mut [Complex], inverse: bool) {
        let plan = if inverse { &self.inverse } else { &self.forward };
        let total = data.len();
        let mut buf = vec![Complex::new(0.0, 0.0); self.n];
        for axis in 0..self.d {
            let stride = self.n.pow((self.d - 1 - axis) as u32);
            let block = stride * self.n;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    for (i, b) in buf.iter_mut().enumerate() {
                        *b = data[outer + inner + i * stride];
                    }
                    plan.process(&mut buf);
                    for (i, b) in buf.iter().enumerate() {
                        data[outer + inner + i * stride] = *b;
                    }
                }
            }
        }
    }
}

#[derive(Clone)]
pub struct FieldModel {
    d: usize,
    n: usize,
    length: f64,
    mass: f64,
    time_grid: TimeGrid,
    omega: DVector<f64>,
    momenta: Vec<Vec<f64>>,
    fourier: Fourier,
}

impl fmt::Debug for FieldModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldModel")
            .field("d", &self.d)
            .field("n", &self.n)
            .field("length", &self.length)
            .field("mass", &self.mass)
            .field("time_grid", &self.time_grid)
            .finish()
    }
}

impl FieldModel {
    pub fn new(d: usize, n: usize, length: f64, mass: f64, time_grid: TimeGrid) -> Result<Self> {
        if d == 0 || d > 3 {
            return Err(Error::invalid("d", format!("spatial dimension must be 1, 2 or 3, got {d}")));
        }
        if n < 2 {
            return Err(Error::invalid("N", format!("need at least two points per axis, got {n}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::invalid("L", format!("must be positive, got {length}")));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::invalid("mass", format!("must be positive, got {mass}")));
        }
        if time_grid.points < 3 || !(time_grid.extent > 0.0 && time_grid.extent.is_finite()) {
            return Err(Error::invalid(
                "time_grid",
                format!("need M >= 3 points and T > 0, got M = {}, T = {}", time_grid.points, time_grid.extent),
            ));
        }
        let modes = n.pow(d as u32);
        let mut momenta = Vec::with_capacity(modes);
        let mut omega = DVector::zeros(modes);
        for m in 0..modes {
            let p: Vec<f64> = multi_index(m, n, d)
                .iter()
                .map(|&j| 2.0 * std::f64::consts::PI * signed_index(j, n) as f64 / length)
                .collect();
            omega[m] = (p.iter().map(|x| x * x).sum::<f64>() + mass * mass).sqrt();
            momenta.push(p);
        }
        Ok(Self {
            d,
            n,
            length,
            mass,
            time_grid,
            omega,
            momenta,
            fourier: Fourier::new(n, d),
        })
    }

    /// One spatial dimension.
    pub fn line(n: usize, length: f64, mass: f64, time_grid: TimeGrid) -> Result<Self> {
        Self::new(1, n, length, mass, time_grid)
    }

    pub fn spatial_dim(&self) -> usize {
        self.d
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    /// Number of spatial grid points, equal to the number of modes.
    pub fn n_points(&self) -> usize {
        self.omega.len()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// `L^d`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.d as i32)
    }

    /// `a^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    pub fn time_grid(&self) -> TimeGrid {
        self.time_grid
    }

    pub fn omega(&self) -> &DVector<f64> {
        &self.omega
    }

    pub fn momentum(&self, mode: usize) -> &[f64] {
        &self.momenta[mode]
    }

    /// Grid coordinates of a flattened spatial index.
    pub fn position(&self, point: usize) -> Vec<f64> {
        multi_index(point, self.n, self.d)
            .iter()
            .map(|&j| j as f64 * self.spacing())
            .collect()
    }

    /// Flattened index of the mode with momentum `-p`.
    pub fn negative_mode(&self, mode: usize) -> usize {
        let idx: Vec<usize> = multi_index(mode, self.n, self.d)
            .iter()
            .map(|&j| (self.n - j) % self.n)
            .collect();
        flat_index(&idx, self.n)
    }

    pub fn ground(&self) -> GroundStructure {
        GroundStructure::new(self.omega.clone(), self.mass).expect("dispersion is bounded below by the mass")
    }

    /// Realification of the one-particle space.
    pub fn space(&self) -> RealifiedSpace {
        RealifiedSpace::new(self.n_points())
    }

    /// `f̂ = a^d Σ_j f(x_j) e^{-ip·x_j}`.
    pub fn spatial_transform(&self, f: &[f64]) -> DVector<Complex> {
        assert_eq!(f.len(), self.n_points(), "grid function length");
        let mut data: Vec<Complex> = f.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.fourier.apply(&mut data, false);
        let a = self.cell_volume();
        DVector::from_iterator(data.len(), data.into_iter().map(|z| z * a))
    }

    /// `L^{-d} Σ_k f̂(k) e^{ip·x}`, complex valued.
    pub fn inverse_transform_complex(&self, fhat: &DVector<Complex>) -> Vec<Complex> {
        assert_eq!(fhat.len(), self.n_points(), "mode vector length");
        let mut data: Vec<Complex> = fhat.iter().copied().collect();
        self.fourier.apply(&mut data, true);
        let scale = 1.0 / self.volume();
        data.into_iter().map(|z| z * scale).collect()
    }

    /// Real part of the inverse transform.
    pub fn inverse_transform(&self, fhat: &DVector<Complex>) -> Vec<f64> {
        self.inverse_transform_complex(fhat).into_iter().map(|z| z.re).collect()
    }

    /// `√(2 ω_k L^d)`, the factor between mass-shell and isometric coordinates.
    pub fn shell_weight(&self, mode: usize) -> f64 {
        (2.0 * self.omega[mode] * self.volume()).sqrt()
    }

    pub fn to_isometric(&self, psi: &DVector<Complex>) -> DVector<Complex> {
        DVector::from_fn(psi.len(), |k, _| psi[k] / self.shell_weight(k))
    }

    pub fn from_isometric(&self, psi: &DVector<Complex>) -> DVector<Complex> {
        DVector::from_fn(psi.len(), |k, _| psi[k] * self.shell_weight(k))
    }

    /// Mass-shell restriction `f̂(ω_k, p_k)` of a spacetime test function.
    pub fn shell_restriction(&self, f: &TestFunction) -> DVector<Complex> {
        assert_eq!(f.time_points(), self.time_grid.points, "time grid mismatch");
        assert_eq!(f.space_points(), self.n_points(), "spatial grid mismatch");
        let tau = self.time_grid.spacing();
        let mut out = DVector::from_element(self.n_points(), Complex::new(0.0, 0.0));
        for n in 0..self.time_grid.points {
            let row = f.time_slice(n);
            if row.iter().all(|&v| v == 0.0) {
                continue;
            }
            let t = self.time_grid.time(n);
            let fhat = self.spatial_transform(&row);
            for k in 0..out.len() {
                out[k] += Complex::from_polar(tau, self.omega[k] * t) * fhat[k];
            }
        }
        out
    }

    /// `K∞f` in isometric coordinates.
    pub fn k_infty(&self, f: &TestFunction) -> DVector<Complex> {
        self.to_isometric(&self.shell_restriction(f))
    }

    /// Phase picked up by `K∞` when the test function is pushed forward in
    /// time by `t0`: `K∞(f(· - t0)) = e^{iω t0} K∞f`.
    pub fn time_shift_phase(&self, t0: f64, psi: &DVector<Complex>) -> DVector<Complex> {
        DVector::from_fn(psi.len(), |k, _| Complex::from_polar(1.0, self.omega[k] * t0) * psi[k])
    }

    /// `max_k |conj ψ_k - ψ_{-k}|`, zero exactly on the real factor.
    pub fn reality_residual(&self, psi: &DVector<Complex>) -> f64 {
        (0..psi.len())
            .map(|k| (psi[k].conj() - psi[self.negative_mode(k)]).norm())
            .fold(0.0, f64::max)
    }

    /// `δ₀ψ = F^{-1}(ψ)`, mapping the real factor onto field data.
    pub fn delta0(&self, psi: &DVector<Complex>) -> Vec<f64> {
        self.inverse_transform(&self.from_isometric(psi))
    }

    /// `δ₁ψ = F^{-1}(ψ / iω)`, mapping `i·(real factor)` onto momentum data.
    pub fn delta1(&self, psi: &DVector<Complex>) -> Vec<f64> {
        let raw = self.from_isometric(psi);
        let scaled = DVector::from_fn(raw.len(), |k, _| raw[k] / Complex::new(0.0, self.omega[k]));
        self.inverse_transform(&scaled)
    }

    pub fn delta0_inverse(&self, f: &[f64]) -> DVector<Complex> {
        self.to_isometric(&self.spatial_transform(f))
    }

    pub fn delta1_inverse(&self, g: &[f64]) -> DVector<Complex> {
        let ghat = self.spatial_transform(g);
        let raw = DVector::from_fn(ghat.len(), |k, _| ghat[k] * Complex::new(0.0, self.omega[k]));
        self.to_isometric(&raw)
    }

    fn weighted_inner(&self, f: &[f64], g: &[f64], weight: impl Fn(f64) -> f64) -> f64 {
        let fh = self.spatial_transform(f);
        let gh = self.spatial_transform(g);
        let sum: f64 = (0..fh.len())
            .map(|k| (fh[k].conj() * gh[k]).re * weight(self.omega[k]))
            .sum();
        sum / self.volume()
    }

    /// `⟨f, g⟩_φ = L^{-d} Σ conj(f̂) ĝ / (2ω)`.
    pub fn phi_inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weighted_inner(f, g, |w| 0.5 / w)
    }

    /// `⟨f, g⟩_π = L^{-d} Σ conj(f̂) ĝ ω / 2`.
    pub fn pi_inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.weighted_inner(f, g, |w| 0.5 * w)
    }

    /// `⟨f, g⟩_{L²} = a^d Σ f g`.
    pub fn l2_inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.cell_volume() * f.iter().zip(g).map(|(x, y)| x * y).sum::<f64>()
    }

    /// `β_{πφ}`: multiplication by `-ω` in momentum space.
    pub fn beta_pi_phi(&self, g: &[f64]) -> Vec<f64> {
        let ghat = self.spatial_transform(g);
        let scaled = DVector::from_fn(ghat.len(), |k, _| ghat[k] * -self.omega[k]);
        self.inverse_transform(&scaled)
    }

    /// `√(2/m)`, bounding both `F_π → L²` and `L² → F_φ`.
    pub fn embedding_constant(&self) -> f64 {
        (2.0 / self.mass).sqrt()
    }

    /// Orthonormal frame of the real factor `{ψ : conj ψ_k = ψ_{-k}}`.
    pub fn real_factor(&self) -> RealSubspace {
        let n = self.n_points();
        let mut frame = DMatrix::zeros(2 * n, n);
        let mut col = 0;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for k in 0..n {
            let nk = self.negative_mode(k);
            if nk == k {
                frame[(k, col)] = 1.0;
                col += 1;
            } else if k < nk {
                frame[(k, col)] = r;
                frame[(nk, col)] = r;
                frame[(n + k, col + 1)] = r;
                frame[(n + nk, col + 1)] = -r;
                col += 2;
            }
        }
        debug_assert_eq!(col, n);
        RealSubspace::from_orthonormal(frame, crate::Tolerances::default().tol_rank)
    }
}

fn signed_index(j: usize, n: usize) -> i64 {
    if j < n / 2 + n % 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

fn multi_index(mut flat: usize, n: usize, d: usize) -> Vec<usize> {
    let mut idx = vec![0; d];
    for axis in (0..d).rev() {
        idx[axis] = flat % n;
        flat /= n;
    }
    idx
}

fn flat_index(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &j| acc * n + j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_vector, seeded_rng};
    use approx::assert_abs_diff_eq;

    pub(crate) fn model(n: usize) -> FieldModel {
        FieldModel::line(n, 20.0, 1.0, TimeGrid { points: 401, extent: 16.0 }).unwrap()
    }

    fn real_vec(v: DVector<f64>) -> Vec<f64> {
        v.iter().copied().collect()
    }

    #[test]
    fn dispersion_is_even_and_gapped() {
        for d in 1..=2 {
            let m = FieldModel::new(d, 8, 10.0, 0.7, TimeGrid { points: 11, extent: 2.0 }).unwrap();
            for k in 0..m.n_points() {
                assert!(m.omega()[k] >= 0.7);
                assert_eq!(m.omega()[k], m.omega()[m.negative_mode(k)]);
                assert_eq!(m.negative_mode(m.negative_mode(k)), k);
            }
        }
    }

    #[test]
    fn time_grid_is_symmetric() {
        let g = TimeGrid { points: 9, extent: 4.0 };
        for n in 0..9 {
            assert_eq!(g.time(n), -g.time(8 - n));
        }
        assert_eq!(g.time(4), 0.0);
        let even = TimeGrid { points: 8, extent: 4.0 };
        assert_eq!(even.time(0), -even.time(7));
    }

    #[test]
    fn transform_round_trip() {
        let mut rng = seeded_rng(40);
        for d in 1..=3 {
            let m = FieldModel::new(d, 4, 3.0, 1.0, TimeGrid { points: 5, extent: 1.0 }).unwrap();
            let f = real_vec(random_vector(&mut rng, m.n_points()));
            let back = m.inverse_transform(&m.spatial_transform(&f));
            let err = f.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-13);
        }
    }

    #[test]
    fn transform_matches_direct_sum_in_two_dimensions() {
        let m = FieldModel::new(2, 4, 3.0, 1.0, TimeGrid { points: 5, extent: 1.0 }).unwrap();
        let mut rng = seeded_rng(41);
        let f = real_vec(random_vector(&mut rng, 16));
        let fhat = m.spatial_transform(&f);
        for k in 0..16 {
            let p = m.momentum(k);
            let direct: Complex = (0..16)
                .map(|j| {
                    let x = m.position(j);
                    let phase = -(p[0] * x[0] + p[1] * x[1]);
                    Complex::from_polar(f[j] * m.cell_volume(), phase)
                })
                .sum();
            assert!((direct - fhat[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn delta_maps_are_isometries() {
        let m = model(32);
        let mut rng = seeded_rng(42);
        let f = real_vec(random_vector(&mut rng, 32));
        let g = real_vec(random_vector(&mut rng, 32));
        let psi = m.delta0_inverse(&f);
        assert!(m.reality_residual(&psi) < 1e-12);
        assert_abs_diff_eq!(psi.norm_squared(), m.phi_inner(&f, &f), epsilon = 1e-12);
        let back = m.delta0(&psi);
        assert!(f.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-12));

        let chi = m.delta1_inverse(&g);
        assert_abs_diff_eq!(chi.norm_squared(), m.pi_inner(&g, &g), epsilon = 1e-12);
        let back = m.delta1(&chi);
        assert!(g.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-12));
        // δ₁ lands on i·(real factor)
        let rotated = chi.map(|z| z * Complex::new(0.0, -1.0));
        assert!(m.reality_residual(&rotated) < 1e-12);
    }

    #[test]
    fn beta_pi_phi_is_minus_omega() {
        let m = model(16);
        let mut rng = seeded_rng(43);
        let g = real_vec(random_vector(&mut rng, 16));
        // δ₀ ∘ β ∘ δ₁^{-1}
        let composed = m.delta0(&m.delta1_inverse(&g).map(|z| z * Complex::new(0.0, 1.0)));
        let direct = m.beta_pi_phi(&g);
        assert!(composed.iter().zip(&direct).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn embedding_bounds() {
        let m = model(32);
        let mut rng = seeded_rng(44);
        for _ in 0..10 {
            let f = real_vec(random_vector(&mut rng, 32));
            let c = m.embedding_constant();
            assert!(m.l2_inner(&f, &f).sqrt() <= c * m.pi_inner(&f, &f).sqrt() * (1.0 + 1e-12));
            assert!(m.phi_inner(&f, &f).sqrt() <= c * m.l2_inner(&f, &f).sqrt() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn real_factor_is_a_factor() {
        let m = model(8);
        let k = m.real_factor();
        assert_eq!(k.rank(), 8);
        let beta = m.space().complex_structure().clone();
        assert!((k.frame().transpose() * beta * k.frame()).amax() < 1e-15);
        let mut rng = seeded_rng(45);
        for c in 0..8 {
            let psi = m.space().derealify(&k.frame().column(c).into_owned());
            assert!(m.reality_residual(&psi) < 1e-15);
        }
        let f = real_vec(random_vector(&mut rng, 8));
        let v = m.space().realify(&m.delta0_inverse(&f));
        assert!(k.distance_to(&v) < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        let tg = TimeGrid { points: 11, extent: 2.0 };
        assert!(FieldModel::line(8, 10.0, 0.0, tg).is_err());
        assert!(FieldModel::line(8, -1.0, 1.0, tg).is_err());
        assert!(FieldModel::new(4, 8, 10.0, 1.0, tg).is_err());
        assert!(FieldModel::line(8, 10.0, 1.0, TimeGrid { points: 2, extent: 1.0 }).is_err());
    }
}
