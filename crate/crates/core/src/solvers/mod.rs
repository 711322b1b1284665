//! Krylov and multigrid solvers.

mod multigrid;
mod precond;

pub use multigrid::{
    build_hierarchy, build_projector, build_projector_1d, build_projector_1d_exact,
    gauss_seidel_sweep, multigrid_solve, tgm_spectral_radius, CycleMode, Level, MultigridHierarchy,
    DEFAULT_COARSEST,
};
pub use precond::{DiagScaled, IncompleteCholesky, Preconditioner, SparseCholesky};

use faer::Mat;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::structured::BlockToeplitzOperator;

/// Real symmetric operator applied by matvec.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y);
        y
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y);
    }
}

impl LinearOperator for Mat<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..self.ncols()).map(|j| self[(i, j)] * x[j]).sum();
        }
    }
}

impl LinearOperator for BlockToeplitzOperator {
    fn dim(&self) -> usize {
        BlockToeplitzOperator::dim(self)
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&self.apply_real(x));
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Preconditioned conjugate gradient from a zero initial guess. Stops when
/// `‖b − Ax‖ / ‖b‖ ≤ tol` on the recursively updated residual.
pub fn pcg(
    a: &dyn LinearOperator,
    b: &[f64],
    m: &Preconditioner,
    tol: f64,
    maxit: usize,
) -> Result<SolveOutcome> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let nb = norm(b);
    let mut x = vec![0.0; n];
    if nb == 0.0 {
        return Ok(SolveOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }
    let mut r = b.to_vec();
    let mut z = m.apply_inverse(&r)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = 1.0;
    for it in 1..=maxit {
        a.apply_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut()
            .zip(&ap)
            .for_each(|(ri, api)| *ri -= alpha * api);
        rel = norm(&r) / nb;
        if !rel.is_finite() {
            return Err(Error::Breakdown(format!(
                "non-finite residual at iteration {it}"
            )));
        }
        if rel <= tol {
            return Ok(SolveOutcome {
                x,
                iterations: it,
                relative_residual: rel,
                converged: true,
            });
        }
        z = m.apply_inverse(&r)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut()
            .zip(&z)
            .for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    Ok(SolveOutcome {
        x,
        iterations: maxit,
        relative_residual: rel,
        converged: false,
    })
}
