//! Ground one-particle structures and their thermal doubling.
//!
//! The one-particle Hamiltonian is diagonal in the momentum basis with
//! eigenvalues `ω_k`, and the conjugation `Γ` is entrywise complex
//! conjugation. The thermal structure lives on `H ⊕ H` with
//! `K^β u = Γ s u ⊕ c u`, `s = (e^{βω} - 1)^{-1/2}`, `c = (1 - e^{-βω})^{-1/2}`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::{Complex, Error, RealifiedSpace, Result};

/// Complex inner product, antilinear in the first argument.
pub fn inner(x: &DVector<Complex>, y: &DVector<Complex>) -> Complex {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

#[derive(Debug, Clone)]
pub struct GroundStructure {
    omega: DVector<f64>,
    mass: f64,
}

impl GroundStructure {
    /// `omega` must be bounded below by `mass > 0`.
    pub fn new(omega: DVector<f64>, mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::invalid("mass", format!("must be positive and finite, got {mass}")));
        }
        if let Some((k, w)) = omega
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w >= mass * (1.0 - 1e-12)) || !w.is_finite())
        {
            return Err(Error::invalid(
                "dispersion",
                format!("mode {k} has energy {w}, below the mass gap {mass}"),
            ));
        }
        Ok(Self { omega, mass })
    }

    /// Relativistic dispersion `ω = √(p² + m²)`.
    pub fn relativistic(momenta: &[f64], mass: f64) -> Result<Self> {
        let omega = DVector::from_iterator(momenta.len(), momenta.iter().map(|p| p.hypot(mass)));
        Self::new(omega, mass)
    }

    pub fn n_modes(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &DVector<f64> {
        &self.omega
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn space(&self) -> RealifiedSpace {
        RealifiedSpace::new(self.n_modes())
    }

    /// `e^{-ith} u`.
    pub fn time_evolve(&self, t: f64, u: &DVector<Complex>) -> DVector<Complex> {
        DVector::from_fn(u.len(), |k, _| Complex::from_polar(1.0, -t * self.omega[k]) * u[k])
    }

    pub fn conjugate(&self, u: &DVector<Complex>) -> DVector<Complex> {
        u.map(|z| z.conj())
    }

    /// Realified `e^{-ith}`.
    pub fn evolution_matrix(&self, t: f64) -> DMatrix<f64> {
        let phases = DMatrix::from_diagonal(&self.omega.map(|w| Complex::from_polar(1.0, -t * w)));
        self.space().realify_linear(&phases)
    }

    /// Realified `e^{-λh}` for real `λ`.
    pub fn boltzmann_matrix(&self, lambda: f64) -> DMatrix<f64> {
        let d = self.omega.map(|w| (-lambda * w).exp());
        let mut diag = DVector::zeros(2 * self.n_modes());
        diag.rows_mut(0, self.n_modes()).copy_from(&d);
        diag.rows_mut(self.n_modes(), self.n_modes()).copy_from(&d);
        DMatrix::from_diagonal(&diag)
    }

    pub fn conjugation_matrix(&self) -> DMatrix<f64> {
        self.space().conjugation()
    }

    /// Residuals of `Γ² = I` and `Γ e^{-ith} = e^{ith} Γ`.
    pub fn conjugation_residuals(&self, t: f64) -> (f64, f64) {
        let g = self.conjugation_matrix();
        let n = g.nrows();
        let square = (&g * &g - DMatrix::identity(n, n)).amax();
        let intertwine = (&g * self.evolution_matrix(t) - self.evolution_matrix(-t) * &g).amax();
        (square, intertwine)
    }
}

/// Thermal weights `(s, c)` for a single mode with `x = βω > 0`.
pub fn thermal_weights(x: f64) -> (f64, f64) {
    let s = 1.0 / x.exp_m1().sqrt();
    let c = 1.0 / (-(-x).exp_m1()).sqrt();
    (s, c)
}

#[derive(Debug, Clone)]
pub struct ThermalDoubling {
    ground: GroundStructure,
    beta: f64,
    s: DVector<f64>,
    c: DVector<f64>,
}

pub fn build_thermal(ground: &GroundStructure, beta: f64) -> Result<ThermalDoubling> {
    ThermalDoubling::new(ground.clone(), beta)
}

impl ThermalDoubling {
    pub fn new(ground: GroundStructure, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::invalid("beta", format!("must be positive and finite, got {beta}")));
        }
        let n = ground.n_modes();
        let mut s = DVector::zeros(n);
        let mut c = DVector::zeros(n);
        for k in 0..n {
            let (sk, ck) = thermal_weights(beta * ground.omega[k]);
            s[k] = sk;
            c[k] = ck;
        }
        Ok(Self { ground, beta, s, c })
    }

    pub fn ground(&self) -> &GroundStructure {
        &self.ground
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_modes(&self) -> usize {
        self.ground.n_modes()
    }

    pub fn sinh_weights(&self) -> &DVector<f64> {
        &self.s
    }

    pub fn cosh_weights(&self) -> &DVector<f64> {
        &self.c
    }

    /// Realification of `H ⊕ H`.
    pub fn doubled_space(&self) -> RealifiedSpace {
        self.ground.space().doubled()
    }

    /// `K^β u = Γ s u ⊕ c u`, as a vector of length `2n`.
    pub fn k_beta(&self, u: &DVector<Complex>) -> DVector<Complex> {
        let n = self.n_modes();
        assert_eq!(u.len(), n, "vector must have one entry per mode");
        DVector::from_fn(2 * n, |i, _| {
            if i < n {
                (u[i] * self.s[i]).conj()
            } else {
                u[i - n] * self.c[i - n]
            }
        })
    }

    /// Real matrix of `K^β` from the realified `H` to the realified `H ⊕ H`.
    pub fn k_beta_matrix(&self) -> DMatrix<f64> {
        let n = self.n_modes();
        let mut m = DMatrix::zeros(4 * n, 2 * n);
        for k in 0..n {
            m[(k, k)] = self.s[k];
            m[(n + k, n + k)] = -self.s[k];
            m[(2 * n + k, k)] = self.c[k];
            m[(3 * n + k, n + k)] = self.c[k];
        }
        m
    }

    /// Eigenvalues of `h̃`: `-ω` on the first summand, `ω` on the second.
    pub fn doubled_spectrum(&self) -> DVector<f64> {
        let n = self.n_modes();
        DVector::from_fn(2 * n, |i, _| {
            if i < n {
                -self.ground.omega[i]
            } else {
                self.ground.omega[i - n]
            }
        })
    }

    /// `e^{-izh̃} x` for complex `z`; exact because `h̃` is a finite diagonal matrix.
    pub fn evolve_doubled(&self, z: Complex, x: &DVector<Complex>) -> DVector<Complex> {
        let lambda = self.doubled_spectrum();
        DVector::from_fn(x.len(), |i, _| (Complex::new(0.0, -1.0) * z * lambda[i]).exp() * x[i])
    }

    /// Realified `e^{-ith̃} = e^{ith} ⊕ e^{-ith}`.
    pub fn doubled_evolution_matrix(&self, t: f64) -> DMatrix<f64> {
        let a = self.ground.evolution_matrix(-t);
        let b = self.ground.evolution_matrix(t);
        let n = a.nrows();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&a);
        m.view_mut((n, n), (n, n)).copy_from(&b);
        m
    }

    /// Worst residuals of `c² - s² = 1` and `s/c = e^{-βω/2}` over all modes.
    pub fn weight_residuals(&self) -> (f64, f64) {
        let mut pyth: f64 = 0.0;
        let mut ratio: f64 = 0.0;
        for k in 0..self.n_modes() {
            let (s, c) = (self.s[k], self.c[k]);
            pyth = pyth.max((c * c - s * s - 1.0).abs());
            ratio = ratio.max((s / c - (-0.5 * self.beta * self.ground.omega[k]).exp()).abs());
        }
        (pyth, ratio)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SymplecticReport {
    pub thermal: f64,
    pub ground: f64,
    pub deviation: f64,
    pub pass: bool,
}

/// Compares `2 Im⟨K^β u, K^β v⟩` with `2 Im⟨u, v⟩`.
pub fn verify_symplectic_preservation(
    t: &ThermalDoubling,
    u: &DVector<Complex>,
    v: &DVector<Complex>,
    tol: f64,
) -> SymplecticReport {
    let thermal = 2.0 * inner(&t.k_beta(u), &t.k_beta(v)).im;
    let ground = 2.0 * inner(u, v).im;
    let deviation = (thermal - ground).abs();
    SymplecticReport {
        thermal,
        ground,
        deviation,
        pass: deviation < tol,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KmsReport {
    /// `max_t |F(t + iβ) - G(t)|`.
    pub max_deviation: f64,
    /// The same, divided by `max_t |G(t)|`.
    pub relative_deviation: f64,
    /// Relative mismatch between `⟨e^{-ith̃}x, y⟩` and
    /// `⟨e^{-βh̃/2}x, e^{-ith̃} e^{-βh̃/2}y⟩`. Reported only.
    pub literal_residual: f64,
    pub pass: bool,
}

/// Two-sided boundary condition `F(t + iβ) = G(t)` with
/// `F(t) = ⟨e^{-ith̃}K^β u, K^β v⟩` and `G(t) = ⟨K^β v, e^{-ith̃}K^β u⟩`.
/// Passes when the relative deviation is below `tol`.
pub fn verify_one_particle_kms(
    t: &ThermalDoubling,
    u: &DVector<Complex>,
    v: &DVector<Complex>,
    times: &[f64],
    tol: f64,
) -> KmsReport {
    let x = t.k_beta(u);
    let y = t.k_beta(v);
    let beta = t.beta();
    let half_x = t.evolve_doubled(Complex::new(0.0, -beta / 2.0), &x);
    let half_y = t.evolve_doubled(Complex::new(0.0, -beta / 2.0), &y);
    let (mut dev, mut scale, mut lit, mut lit_scale) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &time in times {
        // F(t + iβ) = ⟨e^{-βh̃} e^{-ith̃} x, y⟩, continued in the antilinear slot
        let f_shifted = inner(&t.evolve_doubled(Complex::new(time, -beta), &x), &y);
        let g = inner(&y, &t.evolve_doubled(Complex::new(time, 0.0), &x));
        dev = dev.max((f_shifted - g).norm());
        scale = scale.max(g.norm());
        let f = inner(&t.evolve_doubled(Complex::new(time, 0.0), &x), &y);
        let literal = inner(&half_x, &t.evolve_doubled(Complex::new(time, 0.0), &half_y));
        lit = lit.max((f - literal).norm());
        lit_scale = lit_scale.max(f.norm());
    }
    let relative_deviation = if scale > 0.0 { dev / scale } else { dev };
    KmsReport {
        max_deviation: dev,
        relative_deviation,
        literal_residual: if lit_scale > 0.0 { lit / lit_scale } else { lit },
        pass: relative_deviation < tol,
    }
}

/// `e^{-ith}` on the ground space.
pub fn time_evolve(g: &GroundStructure, t: f64, u: &DVector<Complex>) -> DVector<Complex> {
    g.time_evolve(t, u)
}
