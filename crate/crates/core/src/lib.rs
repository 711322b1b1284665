//! Spectral symbols of Lagrangian finite element stiffness matrices, the
//! structured (Toeplitz, circulant) matrices they generate, and solvers built
//! on them: circulant and diagonal-scaled preconditioned CG, and two-grid /
//! V-cycle multigrid with symbol-derived projectors.

pub mod coefficient;
pub mod error;
pub mod experiments;
pub mod fem;
pub mod lagrange;
pub mod quadrature;
pub mod solvers;
pub mod sparse;
pub mod spectral;
pub mod structured;
pub mod symbol;
pub mod tgm;

pub use coefficient::Coefficient;
pub use error::{Error, Result};
pub use symbol::MatrixSymbol;
