//! Localized initial-data subspaces, Araki duality on the grid, and the
//! thermal one-particle duality relations for causal diamonds.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::test_function::periodic_offset;
use super::FieldModel;
use crate::duality::{symplectic_complement, DualityContext};
use crate::quasifree::ThermalDoubling;
use crate::{Complex, Error, RealLinearOperator, RealSubspace, Result, SubspaceComparison, Tolerances};

/// Base of a causal diamond: a set of spatial grid points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    mask: Vec<bool>,
}

impl Region {
    pub fn from_mask(mask: Vec<bool>) -> Self {
        Self { mask }
    }

    pub fn full(model: &FieldModel) -> Self {
        Self::from_mask(vec![true; model.n_points()])
    }

    /// Points within `halfwidth` of `center` along every axis (periodically).
    pub fn centered(model: &FieldModel, center: f64, halfwidth: f64) -> Result<Self> {
        if !(halfwidth > 0.0) || halfwidth > 0.5 * model.length() {
            return Err(Error::invalid(
                "halfwidth",
                format!("must lie in (0, L/2], got {halfwidth}"),
            ));
        }
        let slack = 1e-12 * model.length();
        let mask = (0..model.n_points())
            .map(|j| {
                model
                    .position(j)
                    .iter()
                    .all(|&x| periodic_offset(x - center, model.length()).abs() <= halfwidth + slack)
            })
            .collect();
        Ok(Self { mask })
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn complement(&self) -> Self {
        Self::from_mask(self.mask.iter().map(|b| !b).collect())
    }

    pub fn size(&self) -> usize {
        self.mask.iter().filter(|b| **b).count()
    }

    pub fn points(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, b)| **b).map(|(j, _)| j)
    }
}

fn unit(model: &FieldModel, j: usize) -> Vec<f64> {
    let mut e = vec![0.0; model.n_points()];
    e[j] = 1.0;
    e
}

fn realified_columns(model: &FieldModel, cols: Vec<DVector<Complex>>) -> DMatrix<f64> {
    let space = model.space();
    let real: Vec<DVector<f64>> = cols.iter().map(|c| space.realify(c)).collect();
    if real.is_empty() {
        DMatrix::zeros(space.real_dim(), 0)
    } else {
        DMatrix::from_columns(&real)
    }
}

/// `F_R(Σ)`: field data supported in `Σ`, as a subspace of the real factor.
pub fn fr_subspace(model: &FieldModel, region: &Region, tol_rank: f64) -> RealSubspace {
    let cols = region.points().map(|j| model.delta0_inverse(&unit(model, j))).collect();
    RealSubspace::from_columns(&realified_columns(model, cols), tol_rank)
}

/// `F_I(Σ) = β_{πφ}(L²(Σ))`: images of `-ω · e_j` for `j ∈ Σ`.
pub fn fi_subspace(model: &FieldModel, region: &Region, tol_rank: f64) -> RealSubspace {
    let cols = region
        .points()
        .map(|j| model.delta0_inverse(&model.beta_pi_phi(&unit(model, j))))
        .collect();
    RealSubspace::from_columns(&realified_columns(model, cols), tol_rank)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ArakiReport {
    pub region_size: usize,
    pub n_points: usize,
    /// `F_R(Σ)^⊥` against `F_I(Σ^c)`.
    pub real_part: SubspaceComparison,
    /// `F_I(Σ)^⊥` against `F_R(Σ^c)`.
    pub imaginary_part: SubspaceComparison,
    /// Largest entry of the Gram block between `F_R(Σ)` and `F_I(Σ^c)`.
    pub gram_block: f64,
    pub pass: bool,
}

pub fn araki_duality_check(model: &FieldModel, region: &Region, tol: &Tolerances) -> Result<ArakiReport> {
    let factor = model.real_factor();
    let comp = region.complement();
    let fr = fr_subspace(model, region, tol.tol_rank);
    let fi = fi_subspace(model, region, tol.tol_rank);
    let fr_c = fr_subspace(model, &comp, tol.tol_rank);
    let fi_c = fi_subspace(model, &comp, tol.tol_rank);
    let real_part = fr.orthocomplement(Some(&factor), tol.tol_eq)?.compare(&fi_c, tol.tol_eq)?;
    let imaginary_part = fi.orthocomplement(Some(&factor), tol.tol_eq)?.compare(&fr_c, tol.tol_eq)?;
    let gram_block = if fr.is_zero() || fi_c.is_zero() {
        0.0
    } else {
        (fr.frame().transpose() * fi_c.frame()).amax()
    };
    Ok(ArakiReport {
        region_size: region.size(),
        n_points: model.n_points(),
        real_part,
        imaginary_part,
        gram_block,
        pass: real_part.pass && imaginary_part.pass,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HaagReport {
    pub region_size: usize,
    /// `U_O^⊥` against `V_{O'} ⊕ Ṽ`.
    pub u_complement: SubspaceComparison,
    /// `V_O^⊥` against `U_{O'} ⊕ Ũ`.
    pub v_complement: SubspaceComparison,
    /// Symplectic complement of `U_O + βV_O` against `U_{O'} + βV_{O'} + jH`.
    pub assembled: SubspaceComparison,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StandardnessReport {
    pub ambient: usize,
    pub rank: usize,
    /// `dim(H ∧ βH)`.
    pub separating_dim: usize,
    /// `rank(H + βH)`.
    pub span_rank: usize,
    pub deficit: usize,
    /// `4(N - |Σ|)`: what hard truncation forces on a local subspace.
    pub expected_deficit: usize,
    pub pass: bool,
}

/// Thermal one-particle structure of the lattice field, with the real factor
/// given by real-valued field data.
#[derive(Debug, Clone)]
pub struct LocalThermal {
    model: FieldModel,
    ctx: DualityContext,
}

impl LocalThermal {
    pub fn new(model: FieldModel, beta: f64, tol: Tolerances) -> Result<Self> {
        let thermal = ThermalDoubling::new(model.ground(), beta)?;
        let ctx = DualityContext::new(thermal, model.real_factor(), tol)?;
        Ok(Self { model, ctx })
    }

    pub fn model(&self) -> &FieldModel {
        &self.model
    }

    pub fn context(&self) -> &DualityContext {
        &self.ctx
    }

    /// `(U_O, V_O)` built from `F_R(Σ)` and `F_I(Σ)`.
    pub fn local_subspaces(&self, region: &Region) -> Result<(RealSubspace, RealSubspace)> {
        let tol_rank = self.ctx.tolerances().tol_rank;
        let u = self.ctx.build_u(&fr_subspace(&self.model, region, tol_rank))?;
        let v = self.ctx.build_v(&fi_subspace(&self.model, region, tol_rank))?;
        Ok((u, v))
    }

    /// `U_O + βV_O`.
    pub fn local_standard_subspace(&self, region: &Region) -> Result<RealSubspace> {
        let (u, v) = self.local_subspaces(region)?;
        u.sum(&v.apply(&self.beta_op())?)
    }

    fn beta_op(&self) -> RealLinearOperator {
        RealLinearOperator::new(self.ctx.doubled_space().complex_structure().clone())
    }

    pub fn haag_duality_check(&self, region: &Region) -> Result<HaagReport> {
        let tol = self.ctx.tolerances().tol_eq;
        let comp = region.complement();
        let (u, v) = self.local_subspaces(region)?;
        let (u_c, v_c) = self.local_subspaces(&comp)?;
        let kk = self.ctx.factor_doubled();

        let u_complement = u
            .orthocomplement(Some(kk), tol)?
            .compare(&v_c.sum(&self.ctx.build_v_tilde())?, tol)?;
        let v_complement = v
            .orthocomplement(Some(kk), tol)?
            .compare(&u_c.sum(&self.ctx.build_u_tilde())?, tol)?;

        let beta = self.beta_op();
        let local = u.sum(&v.apply(&beta)?)?;
        let lhs = symplectic_complement(&self.ctx.doubled_space(), &local, self.ctx.tolerances())?;
        let j = RealLinearOperator::new(self.ctx.predicted_j());
        let j_global = self.ctx.global_standard_subspace()?.apply(&j)?;
        let rhs = u_c.sum(&v_c.apply(&beta)?)?.sum(&j_global)?;
        let assembled = lhs.compare(&rhs, tol)?;
        Ok(HaagReport {
            region_size: region.size(),
            u_complement,
            v_complement,
            assembled,
            pass: u_complement.pass && v_complement.pass && assembled.pass,
        })
    }

    /// Separating and cyclic parts of `U_O + βV_O` (or of the global subspace
    /// when `region` is `None`).
    pub fn standardness_report(&self, region: Option<&Region>) -> Result<StandardnessReport> {
        let tol = self.ctx.tolerances().tol_eq;
        let n = self.model.n_points();
        let (h, expected_deficit) = match region {
            Some(r) => (self.local_standard_subspace(r)?, 4 * (n - r.size())),
            None => (self.ctx.global_standard_subspace()?, 0),
        };
        let beta_h = h.apply(&self.beta_op())?;
        let separating_dim = h.intersect(&beta_h, tol)?.rank();
        let span_rank = h.sum(&beta_h)?.rank();
        let ambient = 4 * n;
        let deficit = ambient - span_rank;
        Ok(StandardnessReport {
            ambient,
            rank: h.rank(),
            separating_dim,
            span_rank,
            deficit,
            expected_deficit,
            pass: separating_dim == 0 && deficit == expected_deficit,
        })
    }
}
