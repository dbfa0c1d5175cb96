//! Symbolic Weyl algebra over a realified one-particle space.
//!
//! A word is kept in reduced form `phase · W(label)`. Labels are realified
//! one-particle vectors; test functions enter through `K∞`. The symplectic
//! form is `σ(v, w) = 2 Im⟨v, w⟩`, so that
//! `W(v) W(w) = e^{-iσ(v,w)/2} W(v + w)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::field::{FieldModel, TestFunction};
use crate::quasifree::{inner, GroundStructure, ThermalDoubling};
use crate::{Complex, Error, RealLinearOperator, RealSubspace, RealifiedSpace, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeylWord {
    phase: Complex,
    label: DVector<f64>,
}

impl WeylWord {
    /// `W(0)`.
    pub fn identity(real_dim: usize) -> Self {
        Self {
            phase: Complex::new(1.0, 0.0),
            label: DVector::zeros(real_dim),
        }
    }

    pub fn generator(label: DVector<f64>) -> Self {
        Self {
            phase: Complex::new(1.0, 0.0),
            label,
        }
    }

    /// `e^{iθ} W(label)`.
    pub fn with_phase(theta: f64, label: DVector<f64>) -> Self {
        Self {
            phase: Complex::from_polar(1.0, theta),
            label,
        }
    }

    /// `W(K∞f)` for a test function on the model's grid.
    pub fn from_test_function(model: &FieldModel, f: &TestFunction) -> Self {
        Self::generator(model.space().realify(&model.k_infty(f)))
    }

    pub fn phase(&self) -> Complex {
        self.phase
    }

    pub fn label(&self) -> &DVector<f64> {
        &self.label
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.label.amax() <= tol && (self.phase - Complex::new(1.0, 0.0)).norm() <= tol
    }

    /// Distance in phase and label, whichever is larger.
    pub fn distance(&self, other: &WeylWord) -> f64 {
        assert_eq!(self.label.len(), other.label.len(), "labels live in different spaces");
        (self.phase - other.phase)
            .norm()
            .max((&self.label - &other.label).amax())
    }

    // keeps |phase| = 1 after long products
    fn renormalized(mut self) -> Self {
        self.phase /= self.phase.norm();
        self
    }
}

/// `W(f)W(g) = e^{-iσ(f,g)/2} W(f+g)`, with phases carried along.
pub fn weyl_multiply(a: &WeylWord, b: &WeylWord, space: &RealifiedSpace) -> WeylWord {
    assert_eq!(a.label.len(), space.real_dim(), "label outside the symplectic space");
    assert_eq!(b.label.len(), space.real_dim(), "label outside the symplectic space");
    let sigma = space.symplectic(&a.label, &b.label);
    WeylWord {
        phase: a.phase * b.phase * Complex::from_polar(1.0, -0.5 * sigma),
        label: &a.label + &b.label,
    }
    .renormalized()
}

/// `(λ W(f))* = conj(λ) W(-f)`.
pub fn weyl_star(w: &WeylWord) -> WeylWord {
    WeylWord {
        phase: w.phase.conj(),
        label: -&w.label,
    }
}

/// Reduces a product of words from left to right.
pub fn weyl_product<'a>(
    words: impl IntoIterator<Item = &'a WeylWord>,
    space: &RealifiedSpace,
) -> WeylWord {
    words
        .into_iter()
        .fold(WeylWord::identity(space.real_dim()), |acc, w| weyl_multiply(&acc, w, space))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeylRelationReport {
    /// `W(f)* = W(-f)` on generators.
    pub star: f64,
    /// `W(f)W(g) = e^{-iσ/2} W(f+g)` against the closed form.
    pub product: f64,
    /// `W(f)W(0) = W(0)W(f) = W(f)`.
    pub unit: f64,
    /// `(ab)c` against `a(bc)`.
    pub associativity: f64,
    /// `(ab)*` against `b* a*`.
    pub anti_multiplicative: f64,
    pub pass: bool,
}

/// Checks the defining relations on three labels.
pub fn weyl_relation_report(
    f: &DVector<f64>,
    g: &DVector<f64>,
    h: &DVector<f64>,
    space: &RealifiedSpace,
    tol: f64,
) -> WeylRelationReport {
    let (wf, wg) = (WeylWord::generator(f.clone()), WeylWord::generator(g.clone()));
    let star = weyl_star(&wf).distance(&WeylWord::generator(-f));
    let expected = WeylWord::with_phase(-0.5 * space.symplectic(f, g), f + g);
    let product = weyl_multiply(&wf, &wg, space).distance(&expected);
    let id = WeylWord::identity(space.real_dim());
    let unit = weyl_multiply(&wf, &id, space)
        .distance(&wf)
        .max(weyl_multiply(&id, &wf, space).distance(&wf));
    // mixed phases so the check is not trivial on generators
    let a = WeylWord::with_phase(0.3, f.clone());
    let b = WeylWord::with_phase(-1.1, g.clone());
    let c = WeylWord::with_phase(2.0, h.clone());
    let left = weyl_multiply(&weyl_multiply(&a, &b, space), &c, space);
    let right = weyl_multiply(&a, &weyl_multiply(&b, &c, space), space);
    let associativity = left.distance(&right);
    let anti_multiplicative = weyl_star(&weyl_multiply(&a, &b, space))
        .distance(&weyl_multiply(&weyl_star(&b), &weyl_star(&a), space));
    let worst = star.max(product).max(unit).max(associativity).max(anti_multiplicative);
    WeylRelationReport {
        star,
        product,
        unit,
        associativity,
        anti_multiplicative,
        pass: worst < tol,
    }
}

/// `α_t W(f) = W(T_t f)`. On a one-particle label the time shift acts as
/// `e^{ith}`.
pub fn free_dynamics(w: &WeylWord, t: f64, ground: &GroundStructure) -> WeylWord {
    let space = ground.space();
    let u = space.derealify(&w.label);
    WeylWord {
        phase: w.phase,
        label: space.realify(&ground.time_evolve(-t, &u)),
    }
}

/// State on the Weyl algebra fixed by a one-particle structure.
#[derive(Debug, Clone, Copy)]
pub enum QuasifreeState<'a> {
    Ground(&'a GroundStructure),
    Thermal(&'a ThermalDoubling),
}

impl QuasifreeState<'_> {
    pub fn ground(&self) -> &GroundStructure {
        match self {
            QuasifreeState::Ground(g) => g,
            QuasifreeState::Thermal(t) => t.ground(),
        }
    }

    /// The one-particle image `u` of a label: itself for the ground state,
    /// `K^β` of it for the thermal one.
    pub fn image(&self, label: &DVector<f64>) -> Result<DVector<Complex>> {
        let space = self.ground().space();
        if label.len() != space.real_dim() {
            return Err(Error::MissingImage);
        }
        let u = space.derealify(label);
        Ok(match self {
            QuasifreeState::Ground(_) => u,
            QuasifreeState::Thermal(t) => t.k_beta(&u),
        })
    }
}

/// `ω(λ W(f)) = λ exp(-‖u‖²/2)` with `u` the one-particle image of `f`.
pub fn evaluate_quasifree(w: &WeylWord, state: QuasifreeState<'_>) -> Result<Complex> {
    let u = state.image(&w.label)?;
    Ok(w.phase * (-0.5 * u.norm_squared()).exp())
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub size: usize,
    /// Smallest eigenvalue of the Gram matrix, relative to its largest.
    pub min_eigenvalue: f64,
    /// Deviation from hermiticity.
    pub hermiticity: f64,
    pub pass: bool,
}

/// Gram matrix `G_ij = ω(w_i* w_j)`, which is positive semidefinite for a state.
pub fn gram_matrix(
    words: &[WeylWord],
    state: QuasifreeState<'_>,
    space: &RealifiedSpace,
) -> Result<DMatrix<Complex>> {
    let n = words.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        let wi = weyl_star(&words[i]);
        for j in 0..n {
            g[(i, j)] = evaluate_quasifree(&weyl_multiply(&wi, &words[j], space), state)?;
        }
    }
    Ok(g)
}

pub fn positivity_report(
    words: &[WeylWord],
    state: QuasifreeState<'_>,
    space: &RealifiedSpace,
    tol: f64,
) -> Result<PositivityReport> {
    let g = gram_matrix(words, state, space)?;
    let hermiticity = (&g - g.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    // a complex Hermitian matrix is PSD iff its realification is
    let n = g.nrows();
    let mut real = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = 0.5 * (g[(i, j)] + g[(j, i)].conj());
            real[(i, j)] = z.re;
            real[(n + i, n + j)] = z.re;
            real[(i, n + j)] = -z.im;
            real[(n + i, j)] = z.im;
        }
    }
    let eig = real.symmetric_eigen().eigenvalues;
    let top = eig.amax().max(f64::MIN_POSITIVE);
    let min_eigenvalue = eig.min() / top;
    Ok(PositivityReport {
        size: n,
        min_eigenvalue,
        hermiticity,
        pass: min_eigenvalue > -tol && hermiticity < tol,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WeylKmsReport {
    pub max_deviation: f64,
    /// `max_t |F(t + iβ) - G(t)| / max_t |G(t)|`.
    pub relative_deviation: f64,
    pub pass: bool,
}

/// Two-point functions `F(t) = ω^β(W(f) α_t W(g))` and
/// `G(t) = ω^β(α_t W(g) W(f))` for generators. With `x = K^βf`,
/// `y = K^βg` and `C = exp(-(‖x‖² + ‖y‖²)/2)` these are
/// `F(t) = C exp(-⟨x, e^{ith̃} y⟩)` and `G(t) = C exp(-⟨e^{ith̃} y, x⟩)`,
/// so `F` is entire in `t`.
pub struct WeylTwoPoint<'a> {
    thermal: &'a ThermalDoubling,
    x: DVector<Complex>,
    y: DVector<Complex>,
    scale: f64,
}

impl<'a> WeylTwoPoint<'a> {
    pub fn new(f: &DVector<f64>, g: &DVector<f64>, thermal: &'a ThermalDoubling) -> Result<Self> {
        let state = QuasifreeState::Thermal(thermal);
        let x = state.image(f)?;
        let y = state.image(g)?;
        let scale = (-0.5 * (x.norm_squared() + y.norm_squared())).exp();
        Ok(Self { thermal, x, y, scale })
    }

    // e^{izh̃}
    fn evolved_y(&self, z: Complex) -> DVector<Complex> {
        self.thermal.evolve_doubled(-z, &self.y)
    }

    pub fn f(&self, z: Complex) -> Complex {
        self.scale * (-inner(&self.x, &self.evolved_y(z))).exp()
    }

    pub fn g(&self, t: f64) -> Complex {
        self.scale * (-inner(&self.evolved_y(Complex::new(t, 0.0)), &self.x)).exp()
    }
}

/// Compares `F(t + iβ)` with `G(t)` on the given times.
pub fn kms_boundary_check(
    f: &DVector<f64>,
    g: &DVector<f64>,
    thermal: &ThermalDoubling,
    times: &[f64],
    tol: f64,
) -> Result<WeylKmsReport> {
    let two_point = WeylTwoPoint::new(f, g, thermal)?;
    let beta = thermal.beta();
    let (mut dev, mut scale) = (0.0f64, 0.0f64);
    for &t in times {
        let g_t = two_point.g(t);
        dev = dev.max((two_point.f(Complex::new(t, beta)) - g_t).norm());
        scale = scale.max(g_t.norm());
    }
    let relative_deviation = if scale > 0.0 { dev / scale } else { dev };
    Ok(WeylKmsReport {
        max_deviation: dev,
        relative_deviation,
        pass: relative_deviation < tol,
    })
}

/// `phase · U(v1) V(v2)` with `v1, v2` in a real form `K` of the
/// one-particle space. `V(v) = W(βv)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SegalWeylLabels {
    pub phase: Complex,
    pub v1: DVector<f64>,
    pub v2: DVector<f64>,
}

impl SegalWeylLabels {
    pub fn new(v1: DVector<f64>, v2: DVector<f64>) -> Self {
        Self {
            phase: Complex::new(1.0, 0.0),
            v1,
            v2,
        }
    }

    /// `U(v1)V(v2) = e^{-i⟨v1,v2⟩} W(v1 + βv2)`.
    pub fn to_weyl(&self, space: &RealifiedSpace) -> WeylWord {
        let label = &self.v1 + space.complex_structure() * &self.v2;
        WeylWord {
            phase: self.phase * Complex::from_polar(1.0, -self.v1.dot(&self.v2)),
            label,
        }
    }

    /// `U(v1)V(v2)U(v3)V(v4) = e^{2i⟨v2,v3⟩} U(v1+v3)V(v2+v4)`.
    pub fn multiply(&self, other: &SegalWeylLabels) -> SegalWeylLabels {
        SegalWeylLabels {
            phase: self.phase * other.phase * Complex::from_polar(1.0, 2.0 * self.v2.dot(&other.v1)),
            v1: &self.v1 + &other.v1,
            v2: &self.v2 + &other.v2,
        }
    }

    pub fn distance(&self, other: &SegalWeylLabels) -> f64 {
        (self.phase - other.phase)
            .norm()
            .max((&self.v1 - &other.v1).amax())
            .max((&self.v2 - &other.v2).amax())
    }
}

/// Splitting `H = K ⊕ βK` of a realified space along a real form `K`.
#[derive(Debug, Clone)]
pub struct SegalSplitting {
    space: RealifiedSpace,
    form: RealSubspace,
    // inverse of [Q, βQ]
    solve: DMatrix<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SegalDecomposition {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    /// `‖v - v1 - βv2‖`.
    pub residual: f64,
}

impl SegalSplitting {
    /// Fails unless `K ∩ βK = 0` and `K + βK` is everything.
    pub fn new(space: RealifiedSpace, form: RealSubspace) -> Result<Self> {
        let n = space.real_dim();
        if form.ambient_dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: form.ambient_dim(),
            });
        }
        if 2 * form.rank() != n {
            return Err(Error::NotStandard {
                reason: format!("real form has rank {} in dimension {}", form.rank(), n),
                condition: f64::INFINITY,
            });
        }
        let q = form.frame().clone();
        let bq = space.complex_structure() * &q;
        let mut m = DMatrix::zeros(n, n);
        m.view_mut((0, 0), (n, n / 2)).copy_from(&q);
        m.view_mut((0, n / 2), (n, n / 2)).copy_from(&bq);
        let svd = m.clone().svd(false, false);
        let condition = svd.singular_values.max() / svd.singular_values.min();
        if !(condition < 1e12) {
            return Err(Error::NotStandard {
                reason: "K and βK are not complementary".into(),
                condition,
            });
        }
        let solve = m.try_inverse().ok_or(Error::Singular { condition })?;
        Ok(Self { space, form, solve })
    }

    /// The canonical real form `{Im = 0}`.
    pub fn canonical(space: RealifiedSpace) -> Self {
        let conj = space.conjugation();
        let n = space.real_dim();
        let real: Vec<usize> = (0..n).filter(|&i| conj[(i, i)] > 0.0).collect();
        let frame = DMatrix::from_fn(n, real.len(), |i, j| if i == real[j] { 1.0 } else { 0.0 });
        let form = RealSubspace::from_orthonormal(frame, 1e-12);
        Self::new(space, form).expect("the real vectors form a real form")
    }

    pub fn space(&self) -> &RealifiedSpace {
        &self.space
    }

    pub fn form(&self) -> &RealSubspace {
        &self.form
    }

    /// Unique `v = v1 + βv2` with `v1, v2 ∈ K`.
    pub fn decompose(&self, v: &DVector<f64>) -> (DVector<f64>, DVector<f64>, f64) {
        let k = self.form.rank();
        let coeffs = &self.solve * v;
        let q = self.form.frame();
        let v1 = q * coeffs.rows(0, k);
        let v2 = q * coeffs.rows(k, k);
        let residual = (v - &v1 - self.space.complex_structure() * &v2).norm();
        (v1, v2, residual)
    }

    /// `W(v) = U(v1) V(v2) e^{i⟨v1,v2⟩}`.
    pub fn to_segal(&self, w: &WeylWord) -> (SegalWeylLabels, f64) {
        let (v1, v2, residual) = self.decompose(&w.label);
        let phase = w.phase * Complex::from_polar(1.0, v1.dot(&v2));
        (SegalWeylLabels { phase, v1, v2 }, residual)
    }

    pub fn to_weyl(&self, s: &SegalWeylLabels) -> WeylWord {
        s.to_weyl(&self.space)
    }

    /// Label of the Segal generator set `R_F(K1, K2)`, namely `K1 ⊕ βK2`.
    pub fn segal_subspace(&self, k1: &RealSubspace, k2: &RealSubspace) -> Result<RealSubspace> {
        let bk2 = k2.apply(&RealLinearOperator::new(self.space.complex_structure().clone()))?;
        k1.sum(&bk2)
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SegalRoundTrip {
    /// Worst phase or label mismatch after Weyl → Segal → Weyl.
    pub weyl: f64,
    /// Worst mismatch after Segal → Weyl → Segal.
    pub segal: f64,
    /// Worst residual of the decomposition `v = v1 + βv2`.
    pub decomposition: f64,
    /// Segal-form products against Weyl-form products.
    pub product: f64,
    pub pass: bool,
}

pub fn segal_round_trip(
    splitting: &SegalSplitting,
    words: &[WeylWord],
    tol: f64,
) -> SegalRoundTrip {
    let (mut weyl, mut segal, mut decomposition, mut product) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for w in words {
        let (s, residual) = splitting.to_segal(w);
        decomposition = decomposition.max(residual);
        let back = splitting.to_weyl(&s);
        weyl = weyl.max(back.distance(w));
        segal = segal.max(splitting.to_segal(&back).0.distance(&s));
    }
    for pair in words.windows(2) {
        let (a, _) = splitting.to_segal(&pair[0]);
        let (b, _) = splitting.to_segal(&pair[1]);
        let via_segal = splitting.to_weyl(&a.multiply(&b));
        let via_weyl = weyl_multiply(&pair[0], &pair[1], splitting.space());
        product = product.max(via_segal.distance(&via_weyl));
    }
    SegalRoundTrip {
        weyl,
        segal,
        decomposition,
        product,
        pass: weyl.max(segal).max(product) < tol && decomposition < tol.max(1e-10),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_vector, seeded_rng};
    use crate::field::{BumpSpec, TimeGrid};
    use proptest::prelude::*;

    fn ground(n: usize) -> GroundStructure {
        let momenta: Vec<f64> = (0..n).map(|k| 0.4 * k as f64 - 0.3).collect();
        GroundStructure::relativistic(&momenta, 1.0).unwrap()
    }

    fn label(seed: u64, dim: usize) -> DVector<f64> {
        random_vector(&mut seeded_rng(seed), dim)
    }

    #[test]
    fn unit_and_inverse() {
        let space = RealifiedSpace::new(3);
        let f = WeylWord::generator(label(1, 6));
        let id = WeylWord::identity(6);
        assert_eq!(weyl_multiply(&f, &id, &space), f);
        let prod = weyl_multiply(&f, &weyl_star(&f), &space);
        assert!(prod.is_identity(1e-14));
        assert_eq!(weyl_star(&id), id);
    }

    #[test]
    fn relations_hold_on_random_labels() {
        let space = RealifiedSpace::new(4);
        for seed in 0..20 {
            let r = weyl_relation_report(&label(seed, 8), &label(seed + 100, 8), &label(seed + 200, 8), &space, 1e-12);
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn commutator_phase() {
        // W(f)W(g) = e^{-iσ(f,g)} W(g)W(f)
        let space = RealifiedSpace::new(2);
        let (f, g) = (label(3, 4), label(4, 4));
        let fg = weyl_multiply(&WeylWord::generator(f.clone()), &WeylWord::generator(g.clone()), &space);
        let gf = weyl_multiply(&WeylWord::generator(g.clone()), &WeylWord::generator(f.clone()), &space);
        let ratio = fg.phase() / gf.phase();
        let expected = Complex::from_polar(1.0, -space.symplectic(&f, &g));
        assert!((ratio - expected).norm() < 1e-12);
    }

    #[test]
    fn dynamics_group_law() {
        let g = ground(5);
        let w = WeylWord::with_phase(0.4, label(7, 10));
        assert!(free_dynamics(&w, 0.0, &g).distance(&w) < 1e-15);
        let there = free_dynamics(&free_dynamics(&w, 0.7, &g), -1.9, &g);
        assert!(there.distance(&free_dynamics(&w, -1.2, &g)) < 1e-12);
        let back = free_dynamics(&free_dynamics(&w, 2.3, &g), -2.3, &g);
        assert!(back.distance(&w) < 1e-12);
    }

    #[test]
    fn dynamics_matches_time_shift_of_test_functions() {
        let model = FieldModel::line(32, 20.0, 1.0, TimeGrid { points: 201, extent: 16.0 }).unwrap();
        let f = TestFunction::bump(&model, &BumpSpec::gaussian(0.0, 0.6, 3.0, 1.2));
        let g = TestFunction::bump(&model, &BumpSpec::gaussian(0.5, 0.5, -2.0, 1.0));
        let steps = 25;
        let t = steps as f64 * model.time_grid().spacing();
        let shifted = WeylWord::from_test_function(&model, &f.time_shift(&model, steps).unwrap());
        let evolved = free_dynamics(&WeylWord::from_test_function(&model, &f), t, &model.ground());
        assert!(shifted.distance(&evolved) < 1e-10);

        let space = model.space();
        let (wf, wg) = (
            WeylWord::from_test_function(&model, &f),
            WeylWord::from_test_function(&model, &g),
        );
        let before = space.symplectic(wf.label(), wg.label());
        let (af, ag) = (free_dynamics(&wf, 1.3, &model.ground()), free_dynamics(&wg, 1.3, &model.ground()));
        assert!((space.symplectic(af.label(), ag.label()) - before).abs() < 1e-9);
    }

    #[test]
    fn thermal_enhancement_single_mode() {
        let g = GroundStructure::new(DVector::from_element(1, 1.0), 1.0).unwrap();
        let t = ThermalDoubling::new(g.clone(), 1.0).unwrap();
        let w = WeylWord::generator(DVector::from_vec(vec![0.3, -0.2]));
        let ground = evaluate_quasifree(&w, QuasifreeState::Ground(&g)).unwrap();
        let thermal = evaluate_quasifree(&w, QuasifreeState::Thermal(&t)).unwrap();
        let ratio = thermal.re.ln() / ground.re.ln();
        assert!((ratio - 2.163_953).abs() < 1e-6);
        assert!((ratio - 1.0 / (0.5f64).tanh()).abs() < 1e-12);
        assert_eq!(evaluate_quasifree(&WeylWord::identity(2), QuasifreeState::Thermal(&t)).unwrap(), Complex::new(1.0, 0.0));
        assert!(matches!(
            evaluate_quasifree(&WeylWord::identity(4), QuasifreeState::Ground(&g)),
            Err(Error::MissingImage)
        ));
    }

    #[test]
    fn state_consistency_per_mode() {
        let g = ground(4);
        let t = ThermalDoubling::new(g.clone(), 0.8).unwrap();
        let f = label(11, 8);
        let u = g.space().derealify(&f);
        let value = evaluate_quasifree(&WeylWord::generator(f), QuasifreeState::Thermal(&t)).unwrap();
        let weighted: f64 = (0..4)
            .map(|k| (t.sinh_weights()[k].powi(2) + t.cosh_weights()[k].powi(2)) * u[k].norm_sqr())
            .sum();
        assert!((-2.0 * value.re.ln() - weighted).abs() < 1e-12);
    }

    #[test]
    fn gram_matrices_are_positive() {
        let g = ground(3);
        let t = ThermalDoubling::new(g.clone(), 1.5).unwrap();
        let space = g.space();
        for seed in 0..10 {
            let words: Vec<WeylWord> = (0..4)
                .map(|i| WeylWord::with_phase(0.2 * i as f64, label(seed * 10 + i, 6)))
                .collect();
            for state in [QuasifreeState::Ground(&g), QuasifreeState::Thermal(&t)] {
                let r = positivity_report(&words, state, &space, 1e-12).unwrap();
                assert!(r.pass, "{r:?}");
            }
        }
    }

    #[test]
    fn kms_trivial_and_single_mode() {
        let g = GroundStructure::new(DVector::from_element(1, 1.3), 1.0).unwrap();
        let t = ThermalDoubling::new(g, 1.0).unwrap();
        let f = DVector::from_vec(vec![0.4, 0.0]);
        let times: Vec<f64> = (0..17).map(|i| -2.0 + 0.25 * i as f64).collect();
        let r = kms_boundary_check(&f, &DVector::zeros(2), &t, &times, 1e-8).unwrap();
        assert_eq!(r.max_deviation, 0.0);
        let r = kms_boundary_check(&f, &f, &t, &times, 1e-8).unwrap();
        assert!(r.relative_deviation < 1e-10, "{r:?}");
    }

    #[test]
    fn kms_fails_for_wrong_temperature() {
        let g = ground(3);
        let hot = ThermalDoubling::new(g.clone(), 0.5).unwrap();
        let two = WeylTwoPoint::new(&label(1, 6).scale(0.3), &label(2, 6).scale(0.3), &hot).unwrap();
        assert!((two.f(Complex::new(0.3, 0.5)) - two.g(0.3)).norm() < 1e-12 * two.g(0.3).norm());
        let dev = (two.f(Complex::new(0.3, 1.0)) - two.g(0.3)).norm();
        assert!(dev > 1e-3 * two.g(0.3).norm());
    }

    #[test]
    fn kms_on_field_bumps() {
        let model = FieldModel::line(32, 20.0, 1.0, TimeGrid { points: 201, extent: 16.0 }).unwrap();
        let t = ThermalDoubling::new(model.ground(), 1.0).unwrap();
        let f = TestFunction::bump(&model, &BumpSpec::gaussian(0.0, 0.6, 2.0, 1.0));
        let g = TestFunction::bump(&model, &BumpSpec::gaussian(-0.4, 0.5, -3.0, 1.5));
        let (wf, wg) = (
            WeylWord::from_test_function(&model, &f),
            WeylWord::from_test_function(&model, &g),
        );
        let times: Vec<f64> = (0..25).map(|i| -3.0 + 0.25 * i as f64).collect();
        let r = kms_boundary_check(wf.label(), wg.label(), &t, &times, 1e-8).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn segal_conversion() {
        let space = RealifiedSpace::new(3);
        let split = SegalSplitting::canonical(space.clone());
        let words: Vec<WeylWord> = (0..6).map(|i| WeylWord::with_phase(0.5 * i as f64, label(i, 6))).collect();
        let r = segal_round_trip(&split, &words, 1e-12);
        assert!(r.pass, "{r:?}");
        // U(v1) alone is W(v1)
        let v1 = split.form().project(&label(9, 6));
        let s = SegalWeylLabels::new(v1.clone(), DVector::zeros(6));
        assert!(split.to_weyl(&s).distance(&WeylWord::generator(v1)) < 1e-15);
    }

    #[test]
    fn segal_conversion_on_tilted_form() {
        // K = e^{iθ_k} R^n is a real form as well
        let space = RealifiedSpace::new(2);
        let rot = space.realify_linear(&DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex::from_polar(1.0, 0.4),
            Complex::from_polar(1.0, -1.1),
        ])));
        let canonical = SegalSplitting::canonical(space.clone());
        let form = canonical.form().apply(&RealLinearOperator::new(rot)).unwrap();
        let split = SegalSplitting::new(space, form).unwrap();
        let words: Vec<WeylWord> = (0..5).map(|i| WeylWord::generator(label(40 + i, 4))).collect();
        assert!(segal_round_trip(&split, &words, 1e-12).pass);
    }

    #[test]
    fn segal_rejects_non_complementary_forms() {
        let space = RealifiedSpace::new(2);
        let q = DMatrix::from_fn(4, 2, |i, j| if i == j || i == j + 2 { 1.0 } else { 0.0 });
        // spans e0 + βe0 direction and its partner: K ∩ βK ≠ 0 for this choice
        let k = RealSubspace::from_columns(&DMatrix::from_columns(&[q.column(0).into_owned(), (space.complex_structure() * q.column(0)).into()]), 1e-12);
        assert!(SegalSplitting::new(space, k).is_err());
    }

    proptest! {
        #[test]
        fn associativity_and_involution(seed in 0u64..1000) {
            let space = RealifiedSpace::new(3);
            let mut rng = seeded_rng(seed);
            let words: Vec<WeylWord> = (0..3)
                .map(|i| WeylWord::with_phase(i as f64, random_vector(&mut rng, 6)))
                .collect();
            let (a, b, c) = (&words[0], &words[1], &words[2]);
            let left = weyl_multiply(&weyl_multiply(a, b, &space), c, &space);
            let right = weyl_multiply(a, &weyl_multiply(b, c, &space), &space);
            prop_assert!(left.distance(&right) < 1e-12);
            prop_assert!(weyl_star(&weyl_star(a)).distance(a) < 1e-15);
            prop_assert!((left.phase().norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn cauchy_schwarz(seed in 0u64..1000, beta in 0.2f64..5.0) {
            let g = ground(3);
            let t = ThermalDoubling::new(g.clone(), beta).unwrap();
            let space = g.space();
            let w = WeylWord::generator(random_vector(&mut seeded_rng(seed), 6));
            let state = QuasifreeState::Thermal(&t);
            let lhs = evaluate_quasifree(&weyl_multiply(&weyl_star(&w), &w, &space), state).unwrap();
            let rhs = evaluate_quasifree(&w, state).unwrap().norm_sqr();
            prop_assert!(lhs.re >= rhs - 1e-15);
        }
    }
}
