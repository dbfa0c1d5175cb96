//! Subspace calculus on `K ⊕ K` for the thermal doubling.
//!
//! `K` is a real factor of the realified one-particle space (`H = K ⊕ βK`)
//! left invariant by `e^{-βh}` and `Γ`. For `K1, K2 ⊆ K` the subspaces
//!
//! ```text
//! U(K1) = { Γ s u ⊕ c u  : u ∈ K1 }     Ũ = { c v ⊕  Γ s v : v ∈ K }
//! V(K2) = { -Γ s u ⊕ c u : u ∈ K2 }     Ṽ = { c v ⊕ -Γ s v : v ∈ K }
//! ```
//!
//! live in `K ⊕ K`, and all orthogonal complements below are taken there.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::quasifree::ThermalDoubling;
use crate::subspace::spectral_norm;
use crate::{Error, RealLinearOperator, RealSubspace, RealifiedSpace, Result, SubspaceComparison, Tolerances};

#[derive(Debug, Clone)]
pub struct DualityContext {
    thermal: ThermalDoubling,
    factor: RealSubspace,
    factor_doubled: RealSubspace,
    tol: Tolerances,
    /// Realified `Γ s` on one copy of `H`.
    gamma_s: DMatrix<f64>,
    /// Realified `c` on one copy of `H`.
    cosh: DMatrix<f64>,
}

impl DualityContext {
    /// Checks that `factor` is a real factor of `H` invariant under
    /// `e^{-βh}` and `Γ`.
    pub fn new(thermal: ThermalDoubling, factor: RealSubspace, tol: Tolerances) -> Result<Self> {
        let n = thermal.n_modes();
        if factor.ambient_dim() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                found: factor.ambient_dim(),
            });
        }
        if factor.rank() != n {
            return Err(Error::invalid(
                "factor",
                format!("a real factor of C^{n} must have real dimension {n}, got {}", factor.rank()),
            ));
        }
        let s = thermal.sinh_weights();
        let c = thermal.cosh_weights();
        let mut gs = DVector::zeros(2 * n);
        let mut cc = DVector::zeros(2 * n);
        for k in 0..n {
            gs[k] = s[k];
            gs[n + k] = -s[k];
            cc[k] = c[k];
            cc[n + k] = c[k];
        }
        let factor_doubled = factor.direct_sum(&factor);
        let ctx = Self {
            thermal,
            factor,
            factor_doubled,
            tol,
            gamma_s: DMatrix::from_diagonal(&gs),
            cosh: DMatrix::from_diagonal(&cc),
        };
        let res = ctx.invariant_residuals();
        if res.orthogonality > tol.tol_eq || res.boltzmann > tol.tol_eq || res.conjugation > tol.tol_eq {
            return Err(Error::invalid(
                "factor",
                format!(
                    "not an invariant real factor (K·βK {:e}, e^(-βh) {:e}, Γ {:e})",
                    res.orthogonality, res.boltzmann, res.conjugation
                ),
            ));
        }
        Ok(ctx)
    }

    /// Context with `K` the real-amplitude vectors of the momentum basis.
    pub fn with_real_factor(thermal: ThermalDoubling, tol: Tolerances) -> Result<Self> {
        let n = thermal.n_modes();
        let frame = DMatrix::from_fn(2 * n, n, |r, c| if r == c { 1.0 } else { 0.0 });
        let factor = RealSubspace::from_orthonormal(frame, tol.tol_rank);
        Self::new(thermal, factor, tol)
    }

    pub fn thermal(&self) -> &ThermalDoubling {
        &self.thermal
    }

    pub fn factor(&self) -> &RealSubspace {
        &self.factor
    }

    /// `K ⊕ K` inside the realified `H ⊕ H`.
    pub fn factor_doubled(&self) -> &RealSubspace {
        &self.factor_doubled
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn space(&self) -> RealifiedSpace {
        self.thermal.ground().space()
    }

    pub fn doubled_space(&self) -> RealifiedSpace {
        self.thermal.doubled_space()
    }

    pub fn invariant_residuals(&self) -> InvariantResiduals {
        let space = self.space();
        let f = self.factor.frame();
        let beta_f = space.complex_structure() * f;
        let leak = |m: DMatrix<f64>| {
            let img = m * f;
            spectral_norm(&(&img - f * (f.transpose() * &img)))
        };
        InvariantResiduals {
            orthogonality: spectral_norm(&(f.transpose() * beta_f)),
            boltzmann: leak(self.thermal.ground().boltzmann_matrix(self.thermal.beta())),
            conjugation: leak(self.thermal.ground().conjugation_matrix()),
        }
    }

    fn check_in_factor(&self, k1: &RealSubspace) -> Result<()> {
        let residual = k1.containment_residual(&self.factor)?;
        if residual > self.tol.tol_eq {
            return Err(Error::NotContained { residual });
        }
        Ok(())
    }

    /// Orthogonal complement of `k1` inside `K`.
    pub fn complement_in_factor(&self, k1: &RealSubspace) -> Result<RealSubspace> {
        k1.orthocomplement(Some(&self.factor), self.tol.tol_eq)
    }

    fn stacked(&self, top: &DMatrix<f64>, bottom: &DMatrix<f64>, frame: &DMatrix<f64>) -> RealSubspace {
        let n2 = frame.nrows();
        let mut cols = DMatrix::zeros(2 * n2, frame.ncols());
        cols.rows_mut(0, n2).copy_from(&(top * frame));
        cols.rows_mut(n2, n2).copy_from(&(bottom * frame));
        RealSubspace::from_columns(&cols, self.tol.tol_rank)
    }

    pub fn build_u(&self, k1: &RealSubspace) -> Result<RealSubspace> {
        self.check_in_factor(k1)?;
        Ok(self.stacked(&self.gamma_s, &self.cosh, k1.frame()))
    }

    pub fn build_v(&self, k2: &RealSubspace) -> Result<RealSubspace> {
        self.check_in_factor(k2)?;
        Ok(self.stacked(&(-&self.gamma_s), &self.cosh, k2.frame()))
    }

    pub fn build_u_tilde(&self) -> RealSubspace {
        self.stacked(&self.cosh, &self.gamma_s, self.factor.frame())
    }

    pub fn build_v_tilde(&self) -> RealSubspace {
        self.stacked(&self.cosh, &(-&self.gamma_s), self.factor.frame())
    }

    /// The operator `A = [[c, -Γs], [-Γs, c]]`, which maps `U(K1)` onto `{0} ⊕ K1`.
    pub fn operator_a(&self) -> RealLinearOperator {
        RealLinearOperator::new(self.block_operator(-1.0))
    }

    /// `A^{-1} = [[c, Γs], [Γs, c]]`.
    pub fn operator_a_inverse(&self) -> RealLinearOperator {
        RealLinearOperator::new(self.block_operator(1.0))
    }

    fn block_operator(&self, sign: f64) -> DMatrix<f64> {
        let n2 = self.cosh.nrows();
        let mut m = DMatrix::zeros(2 * n2, 2 * n2);
        m.view_mut((0, 0), (n2, n2)).copy_from(&self.cosh);
        m.view_mut((n2, n2), (n2, n2)).copy_from(&self.cosh);
        m.view_mut((0, n2), (n2, n2)).copy_from(&(&self.gamma_s * sign));
        m.view_mut((n2, 0), (n2, n2)).copy_from(&(&self.gamma_s * sign));
        m
    }

    /// `2 / √(1 - e^{-βm})`.
    pub fn operator_a_bound(&self) -> f64 {
        let x = self.thermal.beta() * self.thermal.ground().mass();
        2.0 / (-(-x).exp_m1()).sqrt()
    }

    pub fn operator_a_report(&self) -> OperatorAReport {
        let a = self.operator_a();
        let a_inv = self.operator_a_inverse();
        let n = a.nrows();
        let identity_residual = (a.matrix() * a_inv.matrix() - DMatrix::identity(n, n)).amax();
        let norm = a.spectral_norm();
        let bound = self.operator_a_bound();
        OperatorAReport {
            identity_residual,
            norm,
            bound,
            pass: identity_residual < 1e-10 && norm <= bound * (1.0 + 1e-12),
        }
    }

    /// `U(K1)^⊥ = V(K1^⊥) ⊕ Ṽ` inside `K ⊕ K`.
    pub fn orthocomplement_u(&self, k1: &RealSubspace) -> Result<SubspaceComparison> {
        let lhs = self
            .build_u(k1)?
            .orthocomplement(Some(&self.factor_doubled), self.tol.tol_eq)?;
        let rhs = self
            .build_v(&self.complement_in_factor(k1)?)?
            .sum(&self.build_v_tilde())?;
        lhs.compare(&rhs, self.tol.tol_eq)
    }

    /// `V(K2)^⊥ = U(K2^⊥) ⊕ Ũ` inside `K ⊕ K`.
    pub fn orthocomplement_v(&self, k2: &RealSubspace) -> Result<SubspaceComparison> {
        let lhs = self
            .build_v(k2)?
            .orthocomplement(Some(&self.factor_doubled), self.tol.tol_eq)?;
        let rhs = self
            .build_u(&self.complement_in_factor(k2)?)?
            .sum(&self.build_u_tilde())?;
        lhs.compare(&rhs, self.tol.tol_eq)
    }

    pub fn generic_position_report(&self, k1: &RealSubspace, k2: &RealSubspace) -> Result<GenericPositionReport> {
        let tol = self.tol.tol_eq;
        let u = self.build_u(k1)?;
        let v = self.build_v(k2)?;
        let u_perp = u.orthocomplement(Some(&self.factor_doubled), tol)?;
        let v_perp = v.orthocomplement(Some(&self.factor_doubled), tol)?;
        let k1_perp = self.complement_in_factor(k1)?;
        let k2_perp = self.complement_in_factor(k2)?;

        let dim_u_v = u.intersect(&v, tol)?.rank();
        let dim_u_vperp = u.intersect(&v_perp, tol)?.rank();
        let dim_uperp_v = u_perp.intersect(&v, tol)?.rank();
        let dim_uperp_vperp = u_perp.intersect(&v_perp, tol)?.rank();
        let dim_k1_k2perp = k1.intersect(&k2_perp, tol)?.rank();
        let dim_k1perp_k2 = k1_perp.intersect(k2, tol)?.rank();
        let expected_uperp_vperp = 2 * self.factor.rank() - k1.rank() - k2.rank();

        let u_v_trivial = dim_u_v == 0;
        // A maps U ∧ V^⊥ onto {0} ⊕ (K1 ∧ K2^⊥), so even the dimensions agree
        let iff_u_vperp = dim_u_vperp == dim_k1_k2perp;
        let iff_uperp_v = dim_uperp_v == dim_k1perp_k2;
        Ok(GenericPositionReport {
            dim_u_v,
            dim_u_vperp,
            dim_uperp_v,
            dim_uperp_vperp,
            dim_k1_k2perp,
            dim_k1perp_k2,
            expected_uperp_vperp,
            pass: u_v_trivial && iff_u_vperp && iff_uperp_v && dim_uperp_vperp == expected_uperp_vperp,
        })
    }

    /// Distance of `ψ = Γ s w ⊕ c w` from `U(K1) + V(K2)`. Nonzero exactly when `w ∉ K1`.
    pub fn nongeneric_counterexample(
        &self,
        k1: &RealSubspace,
        k2: &RealSubspace,
        w: &DVector<f64>,
    ) -> Result<CounterexampleReport> {
        let in_factor = self.factor.distance_to(w);
        if in_factor > self.tol.tol_eq * w.norm().max(1.0) {
            return Err(Error::NotContained { residual: in_factor });
        }
        let distance = k1.distance_to(w);
        if distance <= self.tol.tol_eq * w.norm().max(1.0) {
            return Err(Error::NotAWitness { distance });
        }
        let psi = DVector::from_iterator(
            2 * w.len(),
            (&self.gamma_s * w).iter().chain((&self.cosh * w).iter()).copied(),
        );
        let sum = self.build_u(k1)?.sum(&self.build_v(k2)?)?;
        let residual = sum.distance_to(&psi);
        Ok(CounterexampleReport {
            witness_distance: distance,
            residual,
            pass: residual > self.tol.tol_eq,
        })
    }

    /// Restricts `U(K1)` and `V(K2)` to the closure of their sum and reports
    /// the four pairwise intersections there. They all vanish exactly when
    /// `K1 ∧ K2^⊥ = 0` and `K1^⊥ ∧ K2 = 0`.
    pub fn reduce_to_generic_position(&self, k1: &RealSubspace, k2: &RealSubspace) -> Result<GenericReduction> {
        let tol = self.tol.tol_eq;
        let u = self.build_u(k1)?;
        let v = self.build_v(k2)?;
        let uv = u.sum(&v)?;
        let u_perp = u.orthocomplement(Some(&uv), tol)?;
        let v_perp = v.orthocomplement(Some(&uv), tol)?;
        let intersection_dims = [
            u.intersect(&v, tol)?.rank(),
            u.intersect(&v_perp, tol)?.rank(),
            u_perp.intersect(&v, tol)?.rank(),
            u_perp.intersect(&v_perp, tol)?.rank(),
        ];
        let all_trivial = intersection_dims.iter().all(|&d| d == 0);
        Ok(GenericReduction {
            uv,
            u,
            v,
            u_perp,
            v_perp,
            intersection_dims,
            all_trivial,
        })
    }

    /// `β_{H⊕H}(S^⊥)`, the symplectic complement in the full doubled space.
    pub fn symplectic_complement(&self, s: &RealSubspace) -> Result<RealSubspace> {
        symplectic_complement(&self.doubled_space(), s, &self.tol)
    }

    /// The global standard subspace `U(K) + βV(K)`.
    pub fn global_standard_subspace(&self) -> Result<RealSubspace> {
        let space = self.doubled_space();
        let beta = RealLinearOperator::new(space.complex_structure().clone());
        self.build_u(&self.factor)?
            .sum(&self.build_v(&self.factor)?.apply(&beta)?)
    }

    /// `Ũ + βṼ`, the expected image of the global standard subspace under `j`.
    pub fn dual_standard_subspace(&self) -> Result<RealSubspace> {
        let beta = RealLinearOperator::new(self.doubled_space().complex_structure().clone());
        self.build_u_tilde().sum(&self.build_v_tilde().apply(&beta)?)
    }

    /// `diag(e^{βh/2}, e^{-βh/2})` on the realified `H ⊕ H`.
    pub fn predicted_delta_sqrt(&self) -> DMatrix<f64> {
        let g = self.thermal.ground();
        let half = 0.5 * self.thermal.beta();
        let n2 = 2 * g.n_modes();
        let mut m = DMatrix::zeros(2 * n2, 2 * n2);
        m.view_mut((0, 0), (n2, n2)).copy_from(&g.boltzmann_matrix(-half));
        m.view_mut((n2, n2), (n2, n2)).copy_from(&g.boltzmann_matrix(half));
        m
    }

    /// `j(x ⊕ y) = Γy ⊕ Γx`.
    pub fn predicted_j(&self) -> DMatrix<f64> {
        let gamma = self.thermal.ground().conjugation_matrix();
        let n2 = gamma.nrows();
        let mut m = DMatrix::zeros(2 * n2, 2 * n2);
        m.view_mut((0, n2), (n2, n2)).copy_from(&gamma);
        m.view_mut((n2, 0), (n2, n2)).copy_from(&gamma);
        m
    }

    /// Builds the Tomita operator of the global standard subspace and
    /// polar-decomposes it.
    pub fn modular_data(&self) -> Result<ModularData> {
        let h = self.global_standard_subspace()?;
        let space = self.doubled_space();
        let beta = space.complex_structure();
        let dim = space.real_dim();
        let r = h.rank();
        if 2 * r != dim {
            return Err(Error::NotStandard {
                reason: format!("standard subspace has rank {r}, expected {}", dim / 2),
                condition: f64::INFINITY,
            });
        }
        let mut basis = DMatrix::zeros(dim, dim);
        basis.columns_mut(0, r).copy_from(h.frame());
        basis.columns_mut(r, r).copy_from(&(beta * h.frame()));
        let basis_op = RealLinearOperator::new(basis);
        let condition = basis_op.condition_number();
        if !condition.is_finite() || condition > 1e12 {
            return Err(Error::NotStandard {
                reason: "H and βH are not complementary".into(),
                condition,
            });
        }
        let basis_inv = basis_op.inverse()?;
        let mut flip = DVector::from_element(dim, 1.0);
        flip.rows_mut(r, r).fill(-1.0);
        let tomita_s = basis_op.matrix() * DMatrix::from_diagonal(&flip) * basis_inv.matrix();
        let delta = tomita_s.transpose() * &tomita_s;
        let eig = ((&delta + delta.transpose()) * 0.5).symmetric_eigen();
        let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
        // δ has condition e^{2β max ω}; past ~1/ε its small eigenvalues are noise
        if !(lo > 0.0) || hi / lo > 1e14 {
            return Err(Error::NotStandard {
                reason: "modular operator is too ill-conditioned to polar-decompose in double precision".into(),
                condition: if lo > 0.0 { hi / lo } else { f64::INFINITY },
            });
        }
        let q = &eig.eigenvectors;
        let sqrt = eig.eigenvalues.map(|l| l.sqrt());
        let delta_sqrt = q * DMatrix::from_diagonal(&sqrt) * q.transpose();
        let inv_sqrt = q * DMatrix::from_diagonal(&sqrt.map(|x| 1.0 / x)) * q.transpose();
        let j = &tomita_s * inv_sqrt;
        Ok(ModularData {
            j,
            delta_sqrt,
            tomita_s,
            condition,
        })
    }

    /// Compares computed modular data with the closed forms.
    pub fn modular_report(&self) -> Result<ModularReport> {
        let data = self.modular_data()?;
        let space = self.doubled_space();
        let beta = space.complex_structure();
        let dim = space.real_dim();
        let tol = self.tol.tol_eq;

        let predicted_delta = self.predicted_delta_sqrt();
        let predicted_j = self.predicted_j();
        let delta_rel_error = (&data.delta_sqrt - &predicted_delta).norm() / predicted_delta.norm();
        let j_rel_error = (&data.j - &predicted_j).norm() / predicted_j.norm();
        let j_involution = (&data.j * &data.j - DMatrix::identity(dim, dim)).amax();
        let j_antilinear = (&data.j * beta + beta * &data.j).amax();
        let delta_linear = (&data.delta_sqrt * beta - beta * &data.delta_sqrt).amax();

        let h = self.global_standard_subspace()?;
        let fixed = (&data.tomita_s * h.frame() - h.frame()).amax();
        let jh = h.apply(&RealLinearOperator::new(data.j.clone()))?;
        let jh_comparison = jh.compare(&self.dual_standard_subspace()?, tol)?;
        let near_degenerate = data.condition > 1e8;
        Ok(ModularReport {
            delta_rel_error,
            j_rel_error,
            j_involution,
            j_antilinear,
            delta_linear,
            tomita_fixed_residual: fixed,
            jh_comparison,
            condition: data.condition,
            near_degenerate,
            pass: delta_rel_error < tol
                && j_rel_error < tol
                && j_involution < tol
                && j_antilinear < tol
                && delta_linear < tol
                && fixed < tol
                && jh_comparison.pass,
        })
    }
}

/// `β(S^⊥)` in the full realified space.
pub fn symplectic_complement(space: &RealifiedSpace, s: &RealSubspace, tol: &Tolerances) -> Result<RealSubspace> {
    let beta = RealLinearOperator::new(space.complex_structure().clone());
    s.orthocomplement(None, tol.tol_eq)?.apply(&beta)
}

/// `max |σ(x, y)|` over frame vectors `x` of `a` and `y` of `b`.
pub fn symplectic_residual(space: &RealifiedSpace, a: &RealSubspace, b: &RealSubspace) -> f64 {
    if a.is_zero() || b.is_zero() {
        return 0.0;
    }
    let m = (space.complex_structure() * a.frame()).transpose() * b.frame();
    2.0 * m.amax()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct InvariantResiduals {
    pub orthogonality: f64,
    pub boltzmann: f64,
    pub conjugation: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OperatorAReport {
    pub identity_residual: f64,
    pub norm: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GenericPositionReport {
    pub dim_u_v: usize,
    pub dim_u_vperp: usize,
    pub dim_uperp_v: usize,
    pub dim_uperp_vperp: usize,
    pub dim_k1_k2perp: usize,
    pub dim_k1perp_k2: usize,
    /// `2 dim K - dim K1 - dim K2`, from `U ∧ V = 0`.
    pub expected_uperp_vperp: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CounterexampleReport {
    pub witness_distance: f64,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct GenericReduction {
    pub uv: RealSubspace,
    pub u: RealSubspace,
    pub v: RealSubspace,
    pub u_perp: RealSubspace,
    pub v_perp: RealSubspace,
    /// Ranks of `U∧V`, `U∧V'`, `U'∧V`, `U'∧V'` with `'` the complement in `UV`.
    pub intersection_dims: [usize; 4],
    pub all_trivial: bool,
}

#[derive(Debug, Clone)]
pub struct ModularData {
    pub j: DMatrix<f64>,
    pub delta_sqrt: DMatrix<f64>,
    pub tomita_s: DMatrix<f64>,
    /// Condition number of the basis `[H, βH]`.
    pub condition: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModularReport {
    pub delta_rel_error: f64,
    pub j_rel_error: f64,
    pub j_involution: f64,
    pub j_antilinear: f64,
    pub delta_linear: f64,
    pub tomita_fixed_residual: f64,
    pub jh_comparison: SubspaceComparison,
    pub condition: f64,
    pub near_degenerate: bool,
    pub pass: bool,
}

/// Symbolic name of a subspace of the factor `K`, closed under `⊥`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SubspaceLabel {
    Zero,
    Whole,
    Named { name: String, perp: bool },
}

impl SubspaceLabel {
    pub fn named(name: impl Into<String>) -> Self {
        Self::Named {
            name: name.into(),
            perp: false,
        }
    }

    pub fn perp(&self) -> Self {
        match self {
            Self::Zero => Self::Whole,
            Self::Whole => Self::Zero,
            Self::Named { name, perp } => Self::Named {
                name: name.clone(),
                perp: !perp,
            },
        }
    }
}

impl fmt::Display for SubspaceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => write!(f, "0"),
            Self::Whole => write!(f, "K"),
            Self::Named { name, perp: false } => write!(f, "{name}"),
            Self::Named { name, perp: true } => write!(f, "{name}^⊥"),
        }
    }
}

/// The commutant of the algebra generated by `(K1, K2)` is generated by `(K2^⊥, K1^⊥)`.
pub fn commutant_labels(k1: &SubspaceLabel, k2: &SubspaceLabel) -> (SubspaceLabel, SubspaceLabel) {
    (k2.perp(), k1.perp())
}
