//! Spectra of assembled matrices and the diagnostics built on them:
//! symbol-based distribution checks, extremal eigenvalue scaling and
//! clustering of preconditioned spectra.

use faer::{Mat, Side};
use serde::Serialize;

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::fem::assemble_pk_2d;
use crate::solvers::SparseCholesky;
use crate::sparse::CsrMatrix;
use crate::structured::{BlockCirculantMatrix, BlockToeplitzOperator, DENSE_LIMIT};
use crate::symbol::{rearranged_sampling, MatrixSymbol};

/// Largest preconditioned matrix formed densely for cluster counts.
pub const CLUSTER_DENSE_LIMIT: usize = 4096;

/// Relative mismatch above which an index counts as an outlier.
pub const OUTLIER_RELATIVE: f64 = 0.05;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SpectrumMeta {
    pub k: usize,
    pub d: usize,
    pub coefficient: String,
    pub n_sub: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl SpectrumReport {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }
}

fn symmetric_eigenvalues(m: &Mat<f64>) -> Result<Vec<f64>> {
    let mut ev = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Factorization(format!("symmetric eigensolver: {e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Full ascending spectrum of a dense symmetric matrix.
pub fn dense_symmetric_spectrum(m: &Mat<f64>, meta: SpectrumMeta) -> Result<SpectrumReport> {
    if m.nrows() > DENSE_LIMIT {
        return Err(Error::TooLarge {
            dim: m.nrows(),
            limit: DENSE_LIMIT,
        });
    }
    Ok(SpectrumReport {
        eigenvalues: symmetric_eigenvalues(m)?,
        meta,
    })
}

/// Full ascending spectrum of a sparse symmetric matrix. Refuses dimensions
/// above the dense limit; use [`extremal_eigenvalues`] there.
pub fn dense_hermitian_spectrum(a: &CsrMatrix, meta: SpectrumMeta) -> Result<SpectrumReport> {
    if a.nrows() > DENSE_LIMIT {
        return Err(Error::TooLarge {
            dim: a.nrows(),
            limit: DENSE_LIMIT,
        });
    }
    if !a.is_symmetric(1e-12 * a.diagonal().iter().fold(0.0, |m: f64, v| m.max(v.abs()))) {
        return Err(Error::Domain("matrix is not symmetric".into()));
    }
    dense_symmetric_spectrum(&a.to_dense(), meta)
}

const LANCZOS_STEPS: usize = 300;

/// Largest eigenvalue estimate of a symmetric operator by Lanczos with full
/// reorthogonalization, stopped once the estimate changes by less than `tol`
/// relatively.
fn lanczos_max(apply: &dyn Fn(&[f64]) -> Vec<f64>, n: usize, tol: f64) -> Result<f64> {
    let steps = LANCZOS_STEPS.min(n);
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0)
        .collect();
    let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut last = f64::NAN;
    for j in 0..steps {
        q.push(v.clone());
        let mut w = apply(&v);
        let a: f64 = w.iter().zip(&v).map(|(x, y)| x * y).sum();
        alpha.push(a);
        for _ in 0..2 {
            for qi in &q {
                let c: f64 = w.iter().zip(qi).map(|(x, y)| x * y).sum();
                w.iter_mut().zip(qi).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let t = Mat::<f64>::from_fn(j + 1, j + 1, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c {
                beta[r]
            } else if c + 1 == r {
                beta[c]
            } else {
                0.0
            }
        });
        let est = *symmetric_eigenvalues(&t)?.last().unwrap();
        if (est - last).abs() <= tol * est.abs() || b < 1e-14 * est.abs() {
            return Ok(est);
        }
        last = est;
        beta.push(b);
        v = w.iter().map(|x| x / b).collect();
    }
    Ok(last)
}

/// `(λ_min, λ_max)` of a sparse SPD matrix: dense below the limit, otherwise
/// Lanczos on `A` and on `A⁻¹` through a sparse Cholesky factor, relative
/// tolerance 1e−8.
pub fn extremal_eigenvalues(a: &CsrMatrix) -> Result<(f64, f64)> {
    if a.nrows() <= DENSE_LIMIT {
        let s = dense_hermitian_spectrum(a, SpectrumMeta::default())?;
        return Ok((s.min(), s.max()));
    }
    let n = a.nrows();
    let lmax = lanczos_max(&|x| a.matvec(x), n, 1e-8)?;
    let chol = SparseCholesky::new(a)?;
    let inv_max = lanczos_max(&|x| chol.solve(x), n, 1e-8)?;
    Ok((1.0 / inv_max, lmax))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Discrepancy {
    pub mean_abs: f64,
    pub max_abs: f64,
    pub outlier_fraction: f64,
}

/// Compares the sorted spectrum with the rearranged symbol samples of
/// `a(x) f(θ)` of the same length.
pub fn distribution_discrepancy(
    spec: &SpectrumReport,
    sym: &MatrixSymbol,
    a: &Coefficient,
    grid: Option<usize>,
) -> Result<Discrepancy> {
    let n = spec.dim();
    let pred = rearranged_sampling(sym, a, n, grid)?;
    let (mut sum, mut max, mut out) = (0.0, 0.0f64, 0usize);
    for (&l, &s) in spec.eigenvalues.iter().zip(&pred) {
        let d = (l - s).abs();
        sum += d;
        max = max.max(d);
        if d > OUTLIER_RELATIVE * s.abs().max(l.abs()) {
            out += 1;
        }
    }
    Ok(Discrepancy {
        mean_abs: sum / n.max(1) as f64,
        max_abs: max,
        outlier_fraction: out as f64 / n.max(1) as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n_sub: usize,
    pub dim: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// `λ_min · N^{2/d}`.
    pub scaled_min: f64,
    /// `κ / N^{2/d}`.
    pub scaled_condition: f64,
}

/// Extremal eigenvalues of `A_n(1, Ω, P_k)` in 2D over a list of `n_sub`.
pub fn extremal_scaling_study(k: usize, n_subs: &[usize]) -> Result<Vec<ScalingRow>> {
    n_subs
        .iter()
        .map(|&n| {
            let a = assemble_pk_2d(k, n, &Coefficient::One)?;
            let (lmin, lmax) = extremal_eigenvalues(&a)?;
            let dim = a.nrows();
            let s = dim as f64;
            Ok(ScalingRow {
                n_sub: n,
                dim,
                lambda_min: lmin,
                lambda_max: lmax,
                scaled_min: lmin * s,
                scaled_condition: lmax / lmin / s,
            })
        })
        .collect()
}

/// Number and fraction of eigenvalues outside `(center − ε, center + ε)`.
pub fn cluster_outliers(eigenvalues: &[f64], center: f64, eps: f64) -> Result<(usize, f64)> {
    if !(eps > 0.0) {
        return Err(Error::Domain("cluster radius must be positive".into()));
    }
    let count = eigenvalues
        .iter()
        .filter(|&&l| (l - center).abs() >= eps)
        .count();
    Ok((count, count as f64 / eigenvalues.len().max(1) as f64))
}

/// Spectrum of `C^{−1/2} A C^{−1/2}` formed densely.
pub fn preconditioned_spectrum(
    apply_a: &dyn Fn(&[f64]) -> Vec<f64>,
    c: &BlockCirculantMatrix,
) -> Result<Vec<f64>> {
    let n = c.dim();
    if n > CLUSTER_DENSE_LIMIT {
        return Err(Error::TooLarge {
            dim: n,
            limit: CLUSTER_DENSE_LIMIT,
        });
    }
    // columns of C^{-1/2}, then A C^{-1/2}, then C^{-1/2} (A C^{-1/2})
    let mut cols = Vec::with_capacity(n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        cols.push(apply_a(&c.apply_inverse_sqrt_real(&e)?));
        e[j] = 0.0;
    }
    let mut m = Mat::<f64>::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        let y = c.apply_inverse_sqrt_real(col)?;
        for i in 0..n {
            m[(i, j)] = y[i];
        }
    }
    let sym = Mat::<f64>::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    symmetric_eigenvalues(&sym)
}

/// The Toeplitz matrix `T_n(f)` with the cut indices replaced by identity rows
/// and columns: the FEM matrix at the Toeplitz size.
pub fn dirichlet_embedding(op: &BlockToeplitzOperator, keep: &[usize]) -> Result<CsrMatrix> {
    let t = op.to_csr()?;
    let mut kept = vec![false; t.nrows()];
    keep.iter().for_each(|&i| kept[i] = true);
    let mut trip: Vec<_> = t
        .triplets()
        .filter(|&(i, j, _)| kept[i] && kept[j])
        .collect();
    trip.extend((0..t.nrows()).filter(|&i| !kept[i]).map(|i| (i, i, 1.0)));
    Ok(CsrMatrix::from_triplets(t.nrows(), t.ncols(), &trip))
}
