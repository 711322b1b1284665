//! Drivers that turn the library into tables: each returns serializable rows
//! and [`write_rows`] renders them as CSV or JSON with deterministic bytes.

use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::fem::{assemble_pk_2d, assemble_qk_1d, assemble_qk_2d, MeshConfig};
use crate::lagrange::{build_1d_symbol_blocks, grad_inner_products, to_f64, Rational};
use crate::solvers::{
    build_hierarchy, multigrid_solve, pcg, CycleMode, LinearOperator, Preconditioner,
    DEFAULT_COARSEST,
};
use crate::sparse::CsrMatrix;
use crate::spectral::{
    cluster_outliers, dense_hermitian_spectrum, dirichlet_embedding, distribution_discrepancy,
    extremal_scaling_study, preconditioned_spectrum, ScalingRow, SpectrumMeta,
};
use crate::structured::{
    cut_indices, BlockCirculantMatrix, BlockToeplitzOperator, StrangCorrection,
};
use crate::symbol::{eig_surfaces, surface_extrema, MatrixSymbol};
use crate::tgm::{condition_report, laurent_det, ConditionReport, Laurent};

/// Seed for every randomized vector unless overridden.
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Usage(format!("unknown format '{s}' (csv | json)"))),
        }
    }
}

/// Writes rows as CSV with a header line, or as a pretty JSON array.
pub fn write_rows<T: Serialize, W: Write>(
    rows: &[T],
    format: OutputFormat,
    mut out: W,
) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

/// Standard normal vector from a ChaCha8 stream.
pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Symbol of `A_n(1, Ω, P_k)` for the supported degrees.
pub fn pk_symbol(k: usize) -> Result<MatrixSymbol> {
    MatrixSymbol::builtin(&format!("f_P{k}"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremaRow {
    pub k: usize,
    pub surface: usize,
    pub min: f64,
    pub argmin_1: f64,
    pub argmin_2: f64,
    pub max: f64,
    pub argmax_1: f64,
    pub argmax_2: f64,
}

/// Min/max of the eigenvalue surfaces of `f_{P_k}` on a `g × g` periodic grid.
pub fn surface_extrema_table(k: usize, g: usize) -> Result<Vec<ExtremaRow>> {
    let s = eig_surfaces(&pk_symbol(k)?, g)?;
    Ok(surface_extrema(&s)
        .into_iter()
        .map(|e| ExtremaRow {
            k,
            surface: e.surface,
            min: e.min,
            argmin_1: e.argmin[0],
            argmin_2: e.argmin[1],
            max: e.max,
            argmax_1: e.argmax[0],
            argmax_2: e.argmax[1],
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetCheckRow {
    pub symbol: String,
    pub samples: usize,
    pub max_relative_error: f64,
}

/// `d_k = det([⟨L_j', L_i'⟩]_{i,j=1..k})`, exact.
pub fn dk_constant(k: usize) -> Result<Rational> {
    let g = grad_inner_products(k)?;
    let m: Vec<Vec<Rational>> = (1..=k)
        .map(|i| (1..=k).map(|j| g.get(i, j)).collect())
        .collect();
    Ok(rational_det(m))
}

fn rational_det(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::from_integer(1);
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| m[i][c] != Rational::from_integer(0)) else {
            return Rational::from_integer(0);
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            for j in c..n {
                let v = m[c][j];
                m[i][j] -= f * v;
            }
        }
    }
    det
}

/// Closed form of `det f_{P_2}`.
pub fn det_f_p2_closed(t: [f64; 2]) -> f64 {
    let (c1, c2) = (t[0].cos(), t[1].cos());
    4096.0 / 81.0 * ((2.0 - 2.0 * c1) + (2.0 - 2.0 * c2) + 1.0 - c1 * c2)
}

/// Closed form of `det f_{P_3}`.
pub fn det_f_p3_closed(t: [f64; 2]) -> f64 {
    let a = 205_891_132_094_649.0 / 81_920_000_000.0;
    let (c1, c2) = (t[0].cos(), t[1].cos());
    a * (-c2 * c1 * c1 - c1 * c2 * c2 + 4.0 * c1 * c1 + 4.0 * c2 * c2
        - 80.0 * c1 * c2
        - 195.0 * c1
        - 195.0 * c2
        + 464.0)
}

fn rel_err(got: f64, expect: f64) -> f64 {
    (got - expect).abs() / expect.abs().max(f64::MIN_POSITIVE)
}

/// `det f_k(z)` as an exact Laurent polynomial, from the rational blocks.
fn exact_det_f_qk(k: usize) -> Result<Laurent> {
    let b = build_1d_symbol_blocks(k)?;
    let entries: Vec<Vec<Laurent>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    Laurent::real([
                        (0, b.k0[i * k + j]),
                        (1, b.k1[i * k + j]),
                        (-1, b.k1[j * k + i]),
                    ])
                })
                .collect()
        })
        .collect();
    Ok(laurent_det(&entries))
}

/// Determinant identities at `samples` random points. The `f_{P_k}` rows use a
/// floating-point determinant; the 1D rows an exact one, since `det f_k` has a
/// double zero at `θ = 0` that no LU factorization resolves to full relative
/// precision.
pub fn symbol_check(samples: usize, seed: u64) -> Result<Vec<DetCheckRow>> {
    use rand::Rng;
    use std::f64::consts::PI;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts2: Vec<[f64; 2]> = (0..samples)
        .map(|_| [rng.random_range(-PI..PI), rng.random_range(-PI..PI)])
        .collect();
    let mut rows = Vec::new();
    for (name, closed) in [
        ("f_P2", det_f_p2_closed as fn([f64; 2]) -> f64),
        ("f_P3", det_f_p3_closed),
    ] {
        let sym = MatrixSymbol::builtin(name)?;
        let err = pts2
            .iter()
            .map(|&t| rel_err(sym.evaluate(&t).determinant().re, closed(t)))
            .fold(0.0, f64::max);
        rows.push(DetCheckRow {
            symbol: name.into(),
            samples,
            max_relative_error: err,
        });
    }
    for k in 1..=4 {
        let det = exact_det_f_qk(k)?;
        let dk = to_f64(dk_constant(k)?);
        let err = pts2
            .iter()
            .map(|t| {
                let got = det.eval_vanishing_at_zero(t[0])?.re;
                Ok(rel_err(got, 4.0 * dk * (t[0] / 2.0).sin().powi(2)))
            })
            .try_fold(0.0, |m, e: Result<f64>| e.map(|e| f64::max(m, e)))?;
        rows.push(DetCheckRow {
            symbol: format!("f_Q{k}"),
            samples,
            max_relative_error: err,
        });
    }
    Ok(rows)
}

/// Assembles the stiffness matrix described by `cfg` and writes it in Matrix Market form.
pub fn assemble_to<W: Write>(cfg: &MeshConfig, out: W) -> Result<CsrMatrix> {
    let a = cfg.assemble()?;
    a.write_matrix_market(out)?;
    Ok(a)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionRow {
    pub index: usize,
    pub eigenvalue: f64,
    pub predicted: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionSummary {
    pub k: usize,
    pub n_sub: usize,
    pub dim: usize,
    pub coefficient: String,
    pub mean_abs: f64,
    pub max_abs: f64,
    pub outlier_fraction: f64,
}

/// Sorted spectrum of `A_n(a, Ω, P_k)` against the rearranged symbol samples.
pub fn distribution_study(
    k: usize,
    n_sub: usize,
    a: &Coefficient,
    grid: Option<usize>,
) -> Result<(Vec<DistributionRow>, DistributionSummary)> {
    let m = assemble_pk_2d(k, n_sub, a)?;
    let meta = SpectrumMeta {
        k,
        d: 2,
        coefficient: a.name(),
        n_sub,
    };
    let spec = dense_hermitian_spectrum(&m, meta)?;
    let sym = pk_symbol(k)?;
    let pred = crate::symbol::rearranged_sampling(&sym, a, spec.dim(), grid)?;
    let disc = distribution_discrepancy(&spec, &sym, a, grid)?;
    let rows = spec
        .eigenvalues
        .iter()
        .zip(&pred)
        .enumerate()
        .map(|(index, (&eigenvalue, &predicted))| DistributionRow {
            index,
            eigenvalue,
            predicted,
        })
        .collect();
    let summary = DistributionSummary {
        k,
        n_sub,
        dim: spec.dim(),
        coefficient: a.name(),
        mean_abs: disc.mean_abs,
        max_abs: disc.max_abs,
        outlier_fraction: disc.outlier_fraction,
    };
    Ok((rows, summary))
}

pub fn extremal_scaling(k: usize, n_subs: &[usize]) -> Result<Vec<ScalingRow>> {
    extremal_scaling_study(k, n_subs)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveRow {
    pub experiment: String,
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub method: String,
    pub tol: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    /// Only filled when timing is requested, so default output stays reproducible.
    pub wall_time_ms: Option<u128>,
}

const MAXIT: usize = 10_000;

/// PCG with `P(a) = D̃^{1/2} A(1) D̃^{1/2}` on `A_n(a, Ω, P_k)`, `b = A·1`.
pub fn diag_scaled_table(
    k: usize,
    n_subs: &[usize],
    a: &Coefficient,
    tol: f64,
    timing: bool,
) -> Result<Vec<SolveRow>> {
    n_subs
        .iter()
        .map(|&n| {
            let start = Instant::now();
            let av = assemble_pk_2d(k, n, a)?;
            let a1 = assemble_pk_2d(k, n, &Coefficient::One)?;
            let m = Preconditioner::diag_scaled(&av, &a1)?;
            let b = av.matvec(&vec![1.0; av.nrows()]);
            let out = pcg(&av, &b, &m, tol, MAXIT)?;
            Ok(SolveRow {
                experiment: format!("diag-scaled/{}", a.name()),
                k,
                d: 2,
                n: av.nrows(),
                method: m.label().into(),
                tol,
                iterations: out.iterations,
                converged: out.converged,
                final_residual: out.relative_residual,
                wall_time_ms: timing.then(|| start.elapsed().as_millis()),
            })
        })
        .collect()
}

/// Which matrix of the Toeplitz-size pair a row refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToeplitzVariant {
    /// `T_n(f_{P_k})` itself.
    Toeplitz,
    /// FEM matrix at the Toeplitz size: cut indices replaced by identity.
    Fem,
}

impl ToeplitzVariant {
    pub fn label(self) -> &'static str {
        match self {
            Self::Toeplitz => "toeplitz",
            Self::Fem => "fem",
        }
    }
}

/// `T_n(f_{P_k})` with `n × n` blocks and its Dirichlet embedding.
pub fn toeplitz_pair(k: usize, n: usize) -> Result<(BlockToeplitzOperator, CsrMatrix, CsrMatrix)> {
    let sym = pk_symbol(k)?;
    let op = BlockToeplitzOperator::new(&sym, &[n, n])?;
    let t = op.to_csr()?;
    let keep = cut_indices(&[n, n], sym.block_size())?;
    let fem = dirichlet_embedding(&op, &keep)?;
    Ok((op, t, fem))
}

/// Strang circulant `C_n(f_{P_k}) + h²eeᵀ` with `h = 1/n`.
pub fn strang_preconditioner(k: usize, n: usize) -> Result<BlockCirculantMatrix> {
    let h = 1.0 / n as f64;
    BlockCirculantMatrix::strang_corrected(&pk_symbol(k)?, &[n, n], h, StrangCorrection::Global)
}

/// PCG on `T_n(f_{P_k})` and on its Dirichlet embedding with identity,
/// IC(0) and Strang circulant preconditioning. `b` is standard normal from
/// `seed`; `b = A·1` is nearly zero in the interior here and hides the growth.
pub fn circulant_table(
    k: usize,
    ns: &[usize],
    tol: f64,
    seed: u64,
    timing: bool,
) -> Result<Vec<SolveRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        let (_, t, fem) = toeplitz_pair(k, n)?;
        let c = strang_preconditioner(k, n)?;
        let dim = t.nrows();
        let b = random_vector(dim, seed);
        for (variant, a) in [
            (ToeplitzVariant::Toeplitz, &t),
            (ToeplitzVariant::Fem, &fem),
        ] {
            for which in ["identity", "ichol0", "strang"] {
                let start = Instant::now();
                let m = match which {
                    "identity" => Preconditioner::Identity,
                    "ichol0" => Preconditioner::ichol0(a)?,
                    _ => Preconditioner::StrangCirculant(c.clone()),
                };
                let out = pcg(a, &b, &m, tol, MAXIT)?;
                rows.push(SolveRow {
                    experiment: format!("circulant/{}", variant.label()),
                    k,
                    d: 2,
                    n: dim,
                    method: m.label().into(),
                    tol,
                    iterations: out.iterations,
                    converged: out.converged,
                    final_residual: out.relative_residual,
                    wall_time_ms: timing.then(|| start.elapsed().as_millis()),
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterRow {
    pub k: usize,
    pub n: usize,
    pub matrix: String,
    pub outliers: usize,
    pub fraction: f64,
    pub eps: f64,
}

/// Outliers of the Strang-preconditioned spectrum around 1.
pub fn weak_cluster_table(k: usize, ns: &[usize], eps: f64) -> Result<Vec<ClusterRow>> {
    let per_n: Vec<Vec<ClusterRow>> = ns
        .par_iter()
        .map(|&n| {
            let (_, t, fem) = toeplitz_pair(k, n)?;
            let c = strang_preconditioner(k, n)?;
            [
                (ToeplitzVariant::Toeplitz, &t),
                (ToeplitzVariant::Fem, &fem),
            ]
            .into_iter()
            .map(|(variant, a)| {
                let ev = preconditioned_spectrum(&|x| a.apply(x), &c)?;
                let (outliers, fraction) = cluster_outliers(&ev, 1.0, eps)?;
                Ok(ClusterRow {
                    k,
                    n: t.nrows(),
                    matrix: variant.label().into(),
                    outliers,
                    fraction,
                    eps,
                })
            })
            .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_n.concat())
}

/// Two-grid and V-cycle iteration counts for `Q_k` stiffness matrices,
/// `b = A·1`.
pub fn multigrid_table(
    k: usize,
    d: usize,
    n_subs: &[usize],
    a: &Coefficient,
    tol: f64,
    timing: bool,
) -> Result<Vec<SolveRow>> {
    let mut rows = Vec::new();
    for &n in n_subs {
        let start = Instant::now();
        let m = match d {
            1 => assemble_qk_1d(k, n, a)?,
            2 => assemble_qk_2d(k, n, a)?,
            _ => {
                return Err(Error::Usage(format!(
                    "multigrid supports d = 1, 2; got {d}"
                )))
            }
        };
        let h = build_hierarchy(&m, k, d, n, DEFAULT_COARSEST)?;
        let setup = start.elapsed();
        let b = m.matvec(&vec![1.0; m.nrows()]);
        for mode in [CycleMode::TwoGrid, CycleMode::VCycle] {
            let s = Instant::now();
            let out = multigrid_solve(&h, &b, tol, MAXIT, mode)?;
            rows.push(SolveRow {
                experiment: format!("multigrid/{}", a.name()),
                k,
                d,
                n: m.nrows(),
                method: mode.label().into(),
                tol,
                iterations: out.iterations,
                converged: out.converged,
                final_residual: out.relative_residual,
                wall_time_ms: timing.then(|| (setup + s.elapsed()).as_millis()),
            });
        }
    }
    Ok(rows)
}

/// Scalar columns of a [`ConditionReport`], for CSV output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionRow {
    pub symbol: String,
    pub projector: String,
    pub grid: usize,
    pub condition_b_min: f64,
    pub condition_r_max: f64,
    pub condition_r_max_half_grid: f64,
    pub commutator_det_abs: f64,
    pub commutator_frobenius: f64,
    pub det_zero_order_at_pi: u32,
}

impl From<&ConditionReport> for ConditionRow {
    fn from(r: &ConditionReport) -> Self {
        Self {
            symbol: r.symbol.clone(),
            projector: r.projector.clone(),
            grid: r.grid,
            condition_b_min: r.condition_b_min,
            condition_r_max: r.condition_r_max,
            condition_r_max_half_grid: r.condition_r_max_half_grid,
            commutator_det_abs: r.commutator_det_abs,
            commutator_frobenius: r.commutator_frobenius,
            det_zero_order_at_pi: r.det_zero_order_at_pi,
        }
    }
}

/// Symbol-level two-grid checks for `f_{Q_k}` with the projector `p_{Q_k}`.
pub fn tgm_check(k: usize, g: usize) -> Result<ConditionReport> {
    let f = MatrixSymbol::builtin(&format!("f_Q{k}"))?;
    let p = MatrixSymbol::builtin(&format!("p_Q{k}"))?;
    condition_report(&f, &p, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dk_values() {
        assert_eq!(dk_constant(1).unwrap(), Rational::from_integer(1));
        assert!(dk_constant(2).unwrap() > Rational::from_integer(0));
    }

    #[test]
    fn symbol_check_small() {
        for r in symbol_check(50, DEFAULT_SEED).unwrap() {
            let tol = if r.symbol.starts_with("f_Q") {
                1e-12
            } else {
                1e-10
            };
            assert!(r.max_relative_error < tol, "{r:?}");
        }
    }

    #[test]
    fn csv_is_deterministic() {
        let rows = diag_scaled_table(2, &[4], &Coefficient::ExpXy, 1e-6, false).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_rows(&rows, OutputFormat::Csv, &mut a).unwrap();
        write_rows(
            &diag_scaled_table(2, &[4], &Coefficient::ExpXy, 1e-6, false).unwrap(),
            OutputFormat::Csv,
            &mut b,
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(String::from_utf8(a)
            .unwrap()
            .starts_with("experiment,k,d,n,method"));
    }

    #[test]
    fn embedding_keeps_fem_block() {
        let (_, t, fem) = toeplitz_pair(2, 4).unwrap();
        assert_eq!(t.nrows(), fem.nrows());
        let keep = cut_indices(&[4, 4], 4).unwrap();
        assert_eq!(keep.len(), 49);
        for &i in &keep {
            for &j in &keep {
                assert_eq!(t.get(i, j), fem.get(i, j));
            }
        }
    }

    #[test]
    fn random_vector_is_seeded() {
        assert_eq!(random_vector(4, 1), random_vector(4, 1));
        assert_ne!(random_vector(4, 1), random_vector(4, 2));
    }
}
