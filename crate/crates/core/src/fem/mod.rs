//! Stiffness assembly on `(0,1)^d` with homogeneous Dirichlet conditions
//! eliminated: `P_k` on Friedrichs–Keller triangulations, `Q_k` on tensor meshes.

mod pk;
mod qk;

pub use pk::{
    assemble_pk_2d, elemental_matrix_exact, elemental_matrix_pk, pk_grouping_permutation,
    pk_symbol_from_assembly, reference_nodes, TriangleType,
};
pub use qk::{assemble_qk_1d, assemble_qk_2d, mass_qk_1d};

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    P,
    Q,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeshConfig {
    pub d: usize,
    pub family: Family,
    pub k: usize,
    pub n_sub: usize,
    pub coefficient: Coefficient,
}

impl MeshConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = match (self.family, self.d) {
            (Family::P, 2) => (1..=3).contains(&self.k),
            (Family::P, 1) | (Family::Q, 1) | (Family::Q, 2) => (1..=4).contains(&self.k),
            _ => false,
        };
        if !ok {
            return Err(Error::Domain(format!(
                "unsupported element {:?}{} in d = {}",
                self.family, self.k, self.d
            )));
        }
        if self.n_sub < 2 {
            return Err(Error::Domain("n_sub must be at least 2".into()));
        }
        Ok(())
    }

    /// Number of internal degrees of freedom.
    pub fn dofs(&self) -> usize {
        (self.n_sub * self.k - 1).pow(self.d as u32)
    }

    pub fn assemble(&self) -> Result<CsrMatrix> {
        self.validate()?;
        match (self.family, self.d) {
            (Family::P, 2) => assemble_pk_2d(self.k, self.n_sub, &self.coefficient),
            (_, 1) => assemble_qk_1d(self.k, self.n_sub, &self.coefficient),
            _ => assemble_qk_2d(self.k, self.n_sub, &self.coefficient),
        }
    }
}
