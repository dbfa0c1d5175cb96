//! Numerical laboratory for one-particle structures of the thermal free
//! scalar field: standard subspaces, the purification map, symplectic
//! complements, and the Araki and Haag duality relations in a finite
//! lattice model.

pub mod duality;
pub mod error;
pub mod field;
pub mod quasifree;
pub mod random;
pub mod subspace;
pub mod weyl;

pub use error::{Error, Result};
pub use nalgebra::{DMatrix, DVector};
pub use subspace::{
    apply_operator, check_bounded_inverse_identity, intersect, orthocomplement, orthonormalize,
    principal_angles, sum_closure, BoundedInverseReport, RealLinearOperator, RealSubspace,
    RealifiedSpace, SubspaceComparison,
};

pub type Complex = nalgebra::Complex<f64>;

/// Numerical tolerances shared by all checks.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Relative singular-value cutoff used when orthonormalizing.
    pub tol_rank: f64,
    /// Principal-angle threshold for declaring two subspaces equal.
    pub tol_eq: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_rank: 1e-10,
            tol_eq: 1e-8,
        }
    }
}
