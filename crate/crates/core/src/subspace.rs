//! Closed real subspaces of a realified Hilbert space.
//!
//! A complex space `C^n` is realified as `R^{2n}` with the layout
//! `(Re z, Im z)`; direct sums of several complex spaces are laid out block
//! by block. Subspaces are stored as orthonormal frames so that rank is always
//! explicit, and every lattice operation (complement, meet, join) is computed
//! from singular values of frame products.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::{Complex, Error, Result, Tolerances};

/// The underlying real space of one or more complex Hilbert spaces, together
/// with its canonical complex structure (multiplication by `i`).
#[derive(Debug, Clone)]
pub struct RealifiedSpace {
    blocks: Vec<usize>,
    complex_structure: DMatrix<f64>,
}

impl RealifiedSpace {
    pub fn new(complex_dim: usize) -> Self {
        Self::from_blocks(vec![complex_dim])
    }

    /// Realification of `C^{n_1} ⊕ … ⊕ C^{n_k}`, each summand laid out as
    /// `(Re, Im)` in turn.
    pub fn from_blocks(blocks: Vec<usize>) -> Self {
        let real_dim = 2 * blocks.iter().sum::<usize>();
        let mut beta = DMatrix::zeros(real_dim, real_dim);
        let mut offset = 0;
        for &n in &blocks {
            for i in 0..n {
                beta[(offset + n + i, offset + i)] = 1.0;
                beta[(offset + i, offset + n + i)] = -1.0;
            }
            offset += 2 * n;
        }
        Self {
            blocks,
            complex_structure: beta,
        }
    }

    /// `H ⊕ H` with the complex structure `β ⊕ β`.
    pub fn doubled(&self) -> Self {
        let mut blocks = self.blocks.clone();
        blocks.extend_from_slice(&self.blocks);
        Self::from_blocks(blocks)
    }

    pub fn complex_dim(&self) -> usize {
        self.blocks.iter().sum()
    }

    pub fn real_dim(&self) -> usize {
        2 * self.complex_dim()
    }

    pub fn complex_structure(&self) -> &DMatrix<f64> {
        &self.complex_structure
    }

    pub fn realify(&self, z: &DVector<Complex>) -> DVector<f64> {
        assert_eq!(z.len(), self.complex_dim(), "complex vector length");
        let mut out = DVector::zeros(self.real_dim());
        let (mut zi, mut ri) = (0, 0);
        for &n in &self.blocks {
            for i in 0..n {
                out[ri + i] = z[zi + i].re;
                out[ri + n + i] = z[zi + i].im;
            }
            zi += n;
            ri += 2 * n;
        }
        out
    }

    pub fn derealify(&self, v: &DVector<f64>) -> DVector<Complex> {
        assert_eq!(v.len(), self.real_dim(), "real vector length");
        let mut out = DVector::from_element(self.complex_dim(), Complex::new(0.0, 0.0));
        let (mut zi, mut ri) = (0, 0);
        for &n in &self.blocks {
            for i in 0..n {
                out[zi + i] = Complex::new(v[ri + i], v[ri + n + i]);
            }
            zi += n;
            ri += 2 * n;
        }
        out
    }

    /// Realified form of a complex-linear matrix acting on this space.
    pub fn realify_linear(&self, m: &DMatrix<Complex>) -> DMatrix<f64> {
        let n = self.complex_dim();
        assert_eq!(m.shape(), (n, n));
        let r = self.real_dim();
        let mut out = DMatrix::zeros(r, r);
        for j in 0..r {
            let mut e = DVector::zeros(r);
            e[j] = 1.0;
            let image = m * self.derealify(&e);
            out.set_column(j, &self.realify(&image));
        }
        out
    }

    /// Realified form of entrywise complex conjugation.
    pub fn conjugation(&self) -> DMatrix<f64> {
        let mut diag = DVector::from_element(self.real_dim(), 1.0);
        let mut offset = 0;
        for &n in &self.blocks {
            for i in 0..n {
                diag[offset + n + i] = -1.0;
            }
            offset += 2 * n;
        }
        DMatrix::from_diagonal(&diag)
    }

    pub fn real_inner(&self, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        v.dot(w)
    }

    /// `σ(v, w) = 2 Im⟨v, w⟩` with the complex product antilinear in the
    /// first slot; in real terms `σ(v, w) = 2⟨βv, w⟩`.
    pub fn symplectic(&self, v: &DVector<f64>, w: &DVector<f64>) -> f64 {
        2.0 * (&self.complex_structure * v).dot(w)
    }
}

/// A closed real subspace, stored as an orthonormal frame.
#[derive(Debug, Clone)]
pub struct RealSubspace {
    frame: DMatrix<f64>,
    tol_rank: f64,
}

impl RealSubspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Self {
            frame: DMatrix::zeros(ambient_dim, 0),
            tol_rank: Tolerances::default().tol_rank,
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self {
            frame: DMatrix::identity(ambient_dim, ambient_dim),
            tol_rank: Tolerances::default().tol_rank,
        }
    }

    /// Span of the columns of `columns`. Directions whose singular value falls
    /// below `tol_rank` times the largest singular value are dropped.
    ///
    /// Panics on non-finite entries.
    pub fn from_columns(columns: &DMatrix<f64>, tol_rank: f64) -> Self {
        // the SVD does not terminate on NaN input
        assert!(columns.iter().all(|x| x.is_finite()), "non-finite entries in subspace generators");
        let (ambient, m) = columns.shape();
        if m == 0 || ambient == 0 {
            return Self {
                frame: DMatrix::zeros(ambient, 0),
                tol_rank,
            };
        }
        let svd = columns.clone().svd(true, false);
        let u = svd.u.expect("left singular vectors requested");
        let smax = svd.singular_values.max();
        if smax <= 0.0 || !smax.is_finite() {
            return Self {
                frame: DMatrix::zeros(ambient, 0),
                tol_rank,
            };
        }
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > tol_rank * smax)
            .collect();
        let frame = DMatrix::from_fn(ambient, keep.len(), |r, c| u[(r, keep[c])]);
        Self { frame, tol_rank }
    }

    /// Wraps a frame that is already orthonormal. Only checked in debug builds.
    pub fn from_orthonormal(frame: DMatrix<f64>, tol_rank: f64) -> Self {
        debug_assert!({
            let g = frame.transpose() * &frame;
            (g - DMatrix::identity(frame.ncols(), frame.ncols())).norm() < 1e-8
        });
        Self { frame, tol_rank }
    }

    pub fn ambient_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn rank(&self) -> usize {
        self.frame.ncols()
    }

    pub fn tol_rank(&self) -> f64 {
        self.tol_rank
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn is_zero(&self) -> bool {
        self.rank() == 0
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.frame * self.frame.transpose()
    }

    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.frame * (self.frame.transpose() * v)
    }

    /// Euclidean distance from `v` to the subspace.
    pub fn distance_to(&self, v: &DVector<f64>) -> f64 {
        (v - self.project(v)).norm()
    }

    fn check_ambient(&self, other: &RealSubspace) -> Result<()> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: other.ambient_dim(),
            });
        }
        Ok(())
    }

    /// Largest singular value of `(I - P_other) F_self`: zero iff `self ⊆ other`.
    pub fn containment_residual(&self, other: &RealSubspace) -> Result<f64> {
        self.check_ambient(other)?;
        if self.is_zero() {
            return Ok(0.0);
        }
        let resid = &self.frame - &other.frame * (other.frame.transpose() * &self.frame);
        Ok(spectral_norm(&resid))
    }

    pub fn orthocomplement(&self, within: Option<&RealSubspace>, tol_eq: f64) -> Result<RealSubspace> {
        match within {
            None => {
                let n = self.ambient_dim();
                let m = DMatrix::identity(n, n) - self.projector();
                Ok(Self {
                    frame: eigvecs_above_half(&m, None),
                    tol_rank: self.tol_rank,
                })
            }
            Some(w) => {
                let residual = self.containment_residual(w)?;
                if residual > tol_eq {
                    return Err(Error::NotContained { residual });
                }
                let c = self.frame.transpose() * &w.frame;
                let k = w.rank();
                let g = DMatrix::identity(k, k) - c.transpose() * c;
                Ok(Self {
                    frame: eigvecs_above_half(&g, Some(&w.frame)),
                    tol_rank: self.tol_rank,
                })
            }
        }
    }

    pub fn principal_angles(&self, other: &RealSubspace) -> Result<Vec<f64>> {
        self.check_ambient(other)?;
        let (a, b) = if self.rank() >= other.rank() {
            (self, other)
        } else {
            (other, self)
        };
        let k = b.rank();
        if k == 0 {
            return Ok(Vec::new());
        }
        let m = a.frame.transpose() * &b.frame;
        let mut cos: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
        cos.sort_by(|x, y| y.total_cmp(x));
        let resid = &b.frame - &a.frame * &m;
        let mut sin: Vec<f64> = resid.svd(false, false).singular_values.iter().copied().collect();
        sin.sort_by(|x, y| x.total_cmp(y));
        // cosines lose all precision near zero angle, sines near π/2
        let angles = (0..k)
            .map(|i| {
                let c = cos[i].clamp(0.0, 1.0);
                if c * c >= 0.5 {
                    sin[i].clamp(0.0, 1.0).asin()
                } else {
                    c.acos()
                }
            })
            .collect();
        Ok(angles)
    }

    /// Directions of `self` and `other` whose principal angle is below `tol`.
    pub fn intersect(&self, other: &RealSubspace, tol: f64) -> Result<RealSubspace> {
        self.check_ambient(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.ambient_dim()).with_tol(self.tol_rank));
        }
        let resid = &other.frame - &self.frame * (self.frame.transpose() * &other.frame);
        let svd = resid.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        let threshold = tol.sin();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] < threshold)
            .collect();
        let coeffs = DMatrix::from_fn(other.rank(), keep.len(), |r, c| v_t[(keep[c], r)]);
        Ok(Self {
            frame: &other.frame * coeffs,
            tol_rank: self.tol_rank,
        })
    }

    /// Closure of `self + other`.
    pub fn sum(&self, other: &RealSubspace) -> Result<RealSubspace> {
        self.check_ambient(other)?;
        let mut cols = DMatrix::zeros(self.ambient_dim(), self.rank() + other.rank());
        cols.columns_mut(0, self.rank()).copy_from(&self.frame);
        cols.columns_mut(self.rank(), other.rank()).copy_from(&other.frame);
        Ok(Self::from_columns(&cols, self.tol_rank))
    }

    /// Closure of `A · self`.
    pub fn apply(&self, op: &RealLinearOperator) -> Result<RealSubspace> {
        if op.ncols() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: op.ncols(),
            });
        }
        let image = op.matrix() * &self.frame;
        if image.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("operator", "image has non-finite entries"));
        }
        Ok(Self::from_columns(&image, self.tol_rank))
    }

    /// Subspace of `R^{a+b}` given by `self ⊕ other` (external direct sum).
    pub fn direct_sum(&self, other: &RealSubspace) -> RealSubspace {
        let (a, b) = (self.ambient_dim(), other.ambient_dim());
        let mut frame = DMatrix::zeros(a + b, self.rank() + other.rank());
        frame
            .view_mut((0, 0), (a, self.rank()))
            .copy_from(&self.frame);
        frame
            .view_mut((a, self.rank()), (b, other.rank()))
            .copy_from(&other.frame);
        Self {
            frame,
            tol_rank: self.tol_rank,
        }
    }

    pub fn compare(&self, other: &RealSubspace, tol: f64) -> Result<SubspaceComparison> {
        SubspaceComparison::new(self, other, tol)
    }

    fn with_tol(mut self, tol_rank: f64) -> Self {
        self.tol_rank = tol_rank;
        self
    }
}

/// Outcome of comparing two subspaces that are expected to coincide.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SubspaceComparison {
    pub rank_left: usize,
    pub rank_right: usize,
    /// Largest principal angle; `π/2` when the ranks differ.
    pub max_angle: f64,
    pub pass: bool,
}

impl SubspaceComparison {
    pub fn new(left: &RealSubspace, right: &RealSubspace, tol: f64) -> Result<Self> {
        let angles = left.principal_angles(right)?;
        let (rank_left, rank_right) = (left.rank(), right.rank());
        let max_angle = if rank_left != rank_right {
            std::f64::consts::FRAC_PI_2
        } else {
            angles.iter().copied().fold(0.0, f64::max)
        };
        Ok(Self {
            rank_left,
            rank_right,
            max_angle,
            pass: rank_left == rank_right && max_angle < tol,
        })
    }
}

/// A real-linear operator between realified spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct RealLinearOperator {
    matrix: DMatrix<f64>,
}

impl RealLinearOperator {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    pub fn compose(&self, rhs: &RealLinearOperator) -> RealLinearOperator {
        Self::new(&self.matrix * &rhs.matrix)
    }

    /// Adjoint with respect to the real inner product.
    pub fn adjoint(&self) -> RealLinearOperator {
        Self::new(self.matrix.transpose())
    }

    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(&self.matrix)
    }

    pub fn condition_number(&self) -> f64 {
        if self.matrix.nrows() != self.matrix.ncols() {
            return f64::INFINITY;
        }
        if self.matrix.nrows() == 0 {
            return 1.0;
        }
        let sv = self.matrix.clone().svd(false, false).singular_values;
        let (max, min) = (sv.max(), sv.min());
        if min <= 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Inverse, refused when the condition number exceeds `1e13`.
    pub fn inverse(&self) -> Result<RealLinearOperator> {
        let condition = self.condition_number();
        if !condition.is_finite() || condition > 1e13 {
            return Err(Error::Singular { condition });
        }
        self.matrix
            .clone()
            .try_inverse()
            .map(Self::new)
            .ok_or(Error::Singular { condition })
    }
}

/// Result of checking `(A V)^⊥ = (A^*)^{-1} V^⊥`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundedInverseReport {
    pub condition: f64,
    pub comparison: SubspaceComparison,
}

pub fn orthonormalize(vectors: &[DVector<f64>], tol_rank: f64) -> Result<RealSubspace> {
    let Some(first) = vectors.first() else {
        return Ok(RealSubspace::zero(0));
    };
    let n = first.len();
    if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.len(),
        });
    }
    let cols = DMatrix::from_columns(vectors);
    Ok(RealSubspace::from_columns(&cols, tol_rank))
}

pub fn orthocomplement(s: &RealSubspace, within: Option<&RealSubspace>, tol: &Tolerances) -> Result<RealSubspace> {
    s.orthocomplement(within, tol.tol_eq)
}

pub fn principal_angles(s1: &RealSubspace, s2: &RealSubspace) -> Result<Vec<f64>> {
    s1.principal_angles(s2)
}

pub fn intersect(s1: &RealSubspace, s2: &RealSubspace, tol: f64) -> Result<RealSubspace> {
    s1.intersect(s2, tol)
}

pub fn sum_closure(s1: &RealSubspace, s2: &RealSubspace) -> Result<RealSubspace> {
    s1.sum(s2)
}

pub fn apply_operator(a: &RealLinearOperator, s: &RealSubspace) -> Result<RealSubspace> {
    s.apply(a)
}

pub fn check_bounded_inverse_identity(
    a: &RealLinearOperator,
    v: &RealSubspace,
    tol: &Tolerances,
) -> Result<BoundedInverseReport> {
    let condition = a.condition_number();
    let adjoint_inverse = a.adjoint().inverse()?;
    let lhs = v.apply(a)?.orthocomplement(None, tol.tol_eq)?;
    let rhs = v.orthocomplement(None, tol.tol_eq)?.apply(&adjoint_inverse)?;
    Ok(BoundedInverseReport {
        condition,
        comparison: lhs.compare(&rhs, tol.tol_eq)?,
    })
}

pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Eigenvectors of a symmetric (near-)projector with eigenvalue above 1/2,
/// mapped through `basis` when given.
fn eigvecs_above_half(m: &DMatrix<f64>, basis: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    let ambient = basis.map_or(m.nrows(), |b| b.nrows());
    if m.nrows() == 0 {
        return DMatrix::zeros(ambient, 0);
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > 0.5)
        .collect();
    let vecs = DMatrix::from_fn(m.nrows(), keep.len(), |r, c| eig.eigenvectors[(r, keep[c])]);
    match basis {
        Some(b) => b * vecs,
        None => vecs,
    }
}
