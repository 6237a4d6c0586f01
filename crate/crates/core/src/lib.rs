//! Finite-level approximations of randomly blown-up finitely ramified
//! self-similar lattices.
//!
//! The crate builds the glued vertex sets `F_<n>`, assembles the scaled
//! Laplace pencils with Neumann and Dirichlet boundary conditions, solves
//! them with a dense symmetric eigensolver, and exposes the finite-level
//! spectral quantities: eigenvalue counting measures, Neumann-Dirichlet
//! eigenspaces, spectral measures of Dirac functions, and the exact
//! finite-level expectation identities relating them.
//!
//! The core is `no_std` (alloc only); file formats and the CLI live in the
//! companion `fractal-spectra` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod eigh;
pub mod error;
pub mod lattice;
pub mod operator;
pub mod spectra;
pub mod structure;

pub use analysis::{density_of_states, nd_density, ConvergenceReport, Verdict};
pub use error::Error;
pub use lattice::{build_level, BlowupWord, LatticeLevel, RawAddress, WordMode};
pub use operator::{assemble_base, assemble_level, norm_bound, restrict_dirichlet, LevelOperator};
pub use spectra::{
    levy_distance, solve_pencil, BoundaryKind, Eigendecomposition, NdSubspace, PointMeasure,
};
pub use structure::{builtin_structure, SelfSimilarStructure, ValidationReport};

/// Size caps failing fast before the dense eigensolve becomes intractable.
#[derive(Clone, Copy, Debug)]
pub struct Caps {
    /// Maximum number of vertices a built level may have.
    pub vertex_cap: usize,
    /// Maximum number of words an enumeration may produce.
    pub word_cap: usize,
    /// Maximum matrix dimension for the dense eigensolver.
    pub dense_cap: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            vertex_cap: 20_000,
            word_cap: 100_000,
            dense_cap: 4_000,
        }
    }
}

/// Tolerances used by clustering, N-D detection and cross-level matching.
///
/// All eigenvalue-scale tolerances are relative to the uniform norm bound K
/// of the structure, which keeps them dimensionless.
#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Eigenvalue clustering width.
    pub cluster: f64,
    /// Relative threshold for the boundary-residual SVD nullspace.
    pub residual: f64,
    /// Cross-level / cross-measure atom matching width.
    pub matching: f64,
}

impl Tolerances {
    /// Defaults scaled by the structure's norm bound K.
    pub fn from_norm_bound(k: f64) -> Self {
        let k = if k > 0.0 { k } else { 1.0 };
        Tolerances {
            cluster: 1e-9 * k,
            residual: 1e-8,
            matching: 1e-7 * k,
        }
    }
}
