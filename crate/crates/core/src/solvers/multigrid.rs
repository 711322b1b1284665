//! Geometric two-grid and V-cycle methods for `Q_k` stiffness matrices.
//!
//! The prolongation is the interpolation of the coarse Lagrange basis at the
//! fine nodes, which is exactly the Toeplitz matrix generated by the projector
//! symbol `p_{Q_k}` times the transposed cutting matrix. In two dimensions it
//! is the Kronecker square of the 1D operator. Coarse matrices are Galerkin
//! products `Pᵀ A P`, smoothing is one forward Gauss–Seidel sweep before and
//! one after the coarse correction.

use std::fmt;
use std::str::FromStr;

use faer::Mat;
use num_traits::Zero;

use super::precond::SparseCholesky;
use super::SolveOutcome;
use crate::error::{Error, Result};
use crate::lagrange::{lagrange_polynomials, to_f64, Rational};
use crate::sparse::CsrMatrix;

/// Coarsening stops once a level has at most this many unknowns.
pub const DEFAULT_COARSEST: usize = 9;

/// Consecutive residual increases tolerated before reporting divergence.
const DIVERGENCE_WINDOW: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleMode {
    TwoGrid,
    VCycle,
}

impl CycleMode {
    pub fn label(self) -> &'static str {
        match self {
            Self::TwoGrid => "two-grid",
            Self::VCycle => "v-cycle",
        }
    }
}

impl fmt::Display for CycleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for CycleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-grid" | "tgm" | "two_grid" => Ok(Self::TwoGrid),
            "v-cycle" | "vcycle" | "v_cycle" => Ok(Self::VCycle),
            _ => Err(Error::Usage(format!(
                "unknown cycle '{s}' (two-grid | v-cycle)"
            ))),
        }
    }
}

/// 1D prolongation from `n_fine / 2` to `n_fine` subintervals for degree `k`,
/// restricted to internal nodes. Entries are exact rationals.
pub fn build_projector_1d_exact(k: usize, n_fine: usize) -> Result<Vec<(usize, usize, Rational)>> {
    if n_fine % 2 != 0 || n_fine < 2 {
        return Err(Error::Domain(format!("cannot halve {n_fine} subintervals")));
    }
    let nc = n_fine / 2;
    if nc * k < 2 {
        return Err(Error::Domain(
            "coarse grid would have no internal nodes".into(),
        ));
    }
    let basis = lagrange_polynomials(k)?;
    let span = 2 * k;
    let mut out = Vec::new();
    for f in 1..n_fine * k {
        let e = (f / span).min(nc - 1);
        let t = Rational::new((f - e * span) as i128, span as i128);
        for (i, phi) in basis.iter().enumerate() {
            let c = e * k + i;
            if c == 0 || c == nc * k {
                continue;
            }
            let v = phi.eval(t);
            if !v.is_zero() {
                out.push((f - 1, c - 1, v));
            }
        }
    }
    Ok(out)
}

pub fn build_projector_1d(k: usize, n_fine: usize) -> Result<CsrMatrix> {
    let t: Vec<_> = build_projector_1d_exact(k, n_fine)?
        .into_iter()
        .map(|(i, j, v)| (i, j, to_f64(v)))
        .collect();
    Ok(CsrMatrix::from_triplets(
        n_fine * k - 1,
        n_fine / 2 * k - 1,
        &t,
    ))
}

/// Prolongation for `d = 1` or the tensor square for `d = 2`.
pub fn build_projector(k: usize, n_fine: usize, d: usize) -> Result<CsrMatrix> {
    let p = build_projector_1d(k, n_fine)?;
    match d {
        1 => Ok(p),
        2 => Ok(p.kron(&p)),
        _ => Err(Error::Domain(format!(
            "projector for d = {d} not supported"
        ))),
    }
}

#[derive(Clone, Debug)]
pub struct Level {
    pub a: CsrMatrix,
    /// Subintervals per direction.
    pub n_sub: usize,
    /// Prolongation from the next coarser level, absent on the coarsest.
    pub p: Option<CsrMatrix>,
}

#[derive(Clone, Debug)]
pub struct MultigridHierarchy {
    k: usize,
    d: usize,
    levels: Vec<Level>,
    /// Factor of level 1, used for the exact coarse solve in two-grid mode.
    two_grid_factor: SparseCholesky,
    /// Factor of the coarsest level.
    coarsest_factor: SparseCholesky,
}

/// Galerkin chain from the fine matrix, halving while the level has more than
/// `threshold` unknowns and the subinterval count stays even. At least one
/// coarse level is always built so that the two-grid method is available.
pub fn build_hierarchy(
    a_fine: &CsrMatrix,
    k: usize,
    d: usize,
    n_sub: usize,
    threshold: usize,
) -> Result<MultigridHierarchy> {
    let expected = (n_sub * k - 1).pow(d as u32);
    if a_fine.nrows() != expected {
        return Err(Error::Domain(format!(
            "fine matrix has {} rows, expected {expected} for k = {k}, d = {d}, n_sub = {n_sub}",
            a_fine.nrows()
        )));
    }
    let mut levels = vec![Level {
        a: a_fine.clone(),
        n_sub,
        p: None,
    }];
    loop {
        let cur = levels.last().unwrap();
        let n = cur.n_sub;
        let small = levels.len() > 1 && cur.a.nrows() <= threshold;
        if small || n % 2 != 0 || (n / 2) * k < 2 {
            break;
        }
        let p = build_projector(k, n, d)?;
        let coarse = cur.a.galerkin(&p);
        levels.last_mut().unwrap().p = Some(p);
        levels.push(Level {
            a: coarse,
            n_sub: n / 2,
            p: None,
        });
    }
    if levels.len() < 2 {
        return Err(Error::Domain(format!(
            "no coarse level: n_sub = {n_sub} cannot be halved"
        )));
    }
    let two_grid_factor = SparseCholesky::new(&levels[1].a)?;
    let coarsest_factor = if levels.len() == 2 {
        two_grid_factor.clone()
    } else {
        SparseCholesky::new(&levels.last().unwrap().a)?
    };
    Ok(MultigridHierarchy {
        k,
        d,
        levels,
        two_grid_factor,
        coarsest_factor,
    })
}

impl MultigridHierarchy {
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn level_dims(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.a.nrows()).collect()
    }

    fn cycle(&self, s: usize, x: &mut [f64], b: &[f64], mode: CycleMode) -> Result<()> {
        let last = match mode {
            CycleMode::TwoGrid => 1,
            CycleMode::VCycle => self.levels.len() - 1,
        };
        if s == last {
            let f = if mode == CycleMode::TwoGrid {
                &self.two_grid_factor
            } else {
                &self.coarsest_factor
            };
            x.copy_from_slice(&f.solve(b));
            return Ok(());
        }
        let lvl = &self.levels[s];
        let p = lvl
            .p
            .as_ref()
            .expect("non-coarsest level has a prolongation");
        gauss_seidel_sweep(&lvl.a, x, b)?;
        let ax = lvl.a.matvec(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let rc = p.transpose().matvec(&r);
        let mut ec = vec![0.0; rc.len()];
        self.cycle(s + 1, &mut ec, &rc, mode)?;
        for (xi, ei) in x.iter_mut().zip(p.matvec(&ec)) {
            *xi += ei;
        }
        gauss_seidel_sweep(&lvl.a, x, b)
    }

    /// One iteration `x ← MG(x, b)` on the finest level.
    pub fn iterate(&self, x: &mut [f64], b: &[f64], mode: CycleMode) -> Result<()> {
        self.cycle(0, x, b, mode)
    }
}

/// Stationary multigrid iteration from a zero initial guess.
pub fn multigrid_solve(
    h: &MultigridHierarchy,
    b: &[f64],
    tol: f64,
    maxit: usize,
    mode: CycleMode,
) -> Result<SolveOutcome> {
    let a = &h.levels[0].a;
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; a.nrows()];
    if nb == 0.0 {
        return Ok(SolveOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }
    let mut prev = 1.0;
    let mut growth = 0;
    let mut rel = 1.0;
    for it in 1..=maxit {
        h.iterate(&mut x, b, mode)?;
        let ax = a.matvec(&x);
        rel = b
            .iter()
            .zip(&ax)
            .map(|(b, a)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
            / nb;
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
        growth = if rel > prev { growth + 1 } else { 0 };
        if growth >= DIVERGENCE_WINDOW {
            return Err(Error::Divergence { iterations: it });
        }
        prev = rel;
    }
    Ok(SolveOutcome {
        x,
        iterations: maxit,
        relative_residual: rel,
        converged: false,
    })
}

/// One forward Gauss–Seidel sweep in place.
pub fn gauss_seidel_sweep(a: &CsrMatrix, x: &mut [f64], b: &[f64]) -> Result<()> {
    for i in 0..a.nrows() {
        let mut s = b[i];
        let mut d = 0.0;
        for (j, v) in a.row(i) {
            if j == i {
                d = v;
            } else {
                s -= v * x[j];
            }
        }
        if d == 0.0 {
            return Err(Error::Domain(format!("zero diagonal in row {i}")));
        }
        x[i] = s / d;
    }
    Ok(())
}

/// Spectral radius of the dense two-grid iteration matrix, built column by
/// column by applying one cycle to unit vectors with a zero right-hand side.
pub fn tgm_spectral_radius(h: &MultigridHierarchy) -> Result<f64> {
    let n = h.levels[0].a.nrows();
    if n > crate::structured::DENSE_LIMIT {
        return Err(Error::TooLarge {
            dim: n,
            limit: crate::structured::DENSE_LIMIT,
        });
    }
    let zero = vec![0.0; n];
    let mut m = Mat::<f64>::zeros(n, n);
    let mut x = vec![0.0; n];
    for j in 0..n {
        x.iter_mut().for_each(|v| *v = 0.0);
        x[j] = 1.0;
        h.iterate(&mut x, &zero, CycleMode::TwoGrid)?;
        for i in 0..n {
            m[(i, j)] = x[i];
        }
    }
    let ev = m
        .eigenvalues()
        .map_err(|e| Error::Factorization(format!("eigenvalues: {e:?}")))?;
    Ok(ev.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::Coefficient;
    use crate::fem::{assemble_qk_1d, assemble_qk_2d};

    fn r(p: i128, q: i128) -> Rational {
        Rational::new(p, q)
    }

    fn dense_exact(k: usize, n: usize) -> Vec<Vec<Rational>> {
        let t = build_projector_1d_exact(k, n).unwrap();
        let (rows, cols) = (n * k - 1, n / 2 * k - 1);
        let mut m = vec![vec![Rational::zero(); cols]; rows];
        for (i, j, v) in t {
            m[i][j] = v;
        }
        m
    }

    #[test]
    fn linear_projector() {
        let m = dense_exact(1, 8);
        assert_eq!(m.len(), 7);
        let h = r(1, 2);
        let z = Rational::zero();
        let one = r(1, 1);
        assert_eq!(m[0], vec![h, z, z]);
        assert_eq!(m[1], vec![one, z, z]);
        assert_eq!(m[2], vec![h, h, z]);
        assert_eq!(m[6], vec![z, z, h]);
    }

    #[test]
    fn quadratic_projector() {
        let m = dense_exact(2, 4);
        let z = Rational::zero();
        let one = r(1, 1);
        let expected = vec![
            vec![r(3, 4), r(-1, 8), z],
            vec![one, z, z],
            vec![r(3, 4), r(3, 8), z],
            vec![z, one, z],
            vec![z, r(3, 8), r(3, 4)],
            vec![z, z, one],
            vec![z, r(-1, 8), r(3, 4)],
        ];
        assert_eq!(m, expected);
    }

    #[test]
    fn cubic_projector() {
        let m = dense_exact(3, 4);
        assert_eq!(m.len(), 11);
        assert_eq!(m[0][..3], [r(15, 16), r(-5, 16), r(1, 16)]);
        assert_eq!(m[2][..3], [r(9, 16), r(9, 16), r(-1, 16)]);
        assert_eq!(m[4][..3], [r(-5, 16), r(15, 16), r(5, 16)]);
        assert_eq!(m[6][2..], [r(5, 16), r(15, 16), r(-5, 16)]);
        assert_eq!(m[8][2..], [r(-1, 16), r(9, 16), r(9, 16)]);
        assert_eq!(m[10][2..], [r(1, 16), r(-5, 16), r(15, 16)]);
        assert_eq!(m[1][0], r(1, 1));
        assert!(m[0][3].is_zero() && m[0][4].is_zero());
    }

    #[test]
    fn odd_subintervals_rejected() {
        assert!(build_projector(2, 7, 1).is_err());
    }

    #[test]
    fn hierarchy_dimensions_2d() {
        let a = assemble_qk_2d(2, 8, &Coefficient::One).unwrap();
        let h = build_hierarchy(&a, 2, 2, 8, DEFAULT_COARSEST).unwrap();
        assert_eq!(h.level_dims(), vec![225, 49, 9]);
    }

    #[test]
    fn linear_hierarchy_with_small_threshold() {
        let a = assemble_qk_1d(1, 8, &Coefficient::One).unwrap();
        let h = build_hierarchy(&a, 1, 1, 8, 3).unwrap();
        assert_eq!(h.level_dims(), vec![7, 3]);
        let h = build_hierarchy(&a, 1, 1, 8, 2).unwrap();
        assert_eq!(h.level_dims(), vec![7, 3, 1]);
    }

    #[test]
    fn galerkin_matches_rediscretization() {
        // for a ≡ 1 the Galerkin coarse matrix is the coarse stiffness matrix
        for k in 1..=3 {
            let a = assemble_qk_1d(k, 16, &Coefficient::One).unwrap();
            let h = build_hierarchy(&a, k, 1, 16, DEFAULT_COARSEST).unwrap();
            let direct = assemble_qk_1d(k, 8, &Coefficient::One).unwrap();
            for (i, j, v) in direct.triplets() {
                assert!((h.levels()[1].a.get(i, j) - v).abs() < 1e-10, "k={k}");
            }
        }
    }

    #[test]
    fn gauss_seidel_identity_and_lower() {
        let a = CsrMatrix::identity(4);
        let mut x = vec![0.0; 4];
        gauss_seidel_sweep(&a, &mut x, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0, 4.0]);
        let l = CsrMatrix::from_triplets(2, 2, &[(0, 0, 2.0), (1, 0, 1.0), (1, 1, 4.0)]);
        let mut x = vec![0.0; 2];
        gauss_seidel_sweep(&l, &mut x, &[2.0, 5.0]).unwrap();
        assert_eq!(x, vec![1.0, 1.0]);
    }

    #[test]
    fn gauss_seidel_damps_oscillations() {
        let a = assemble_qk_1d(1, 32, &Coefficient::One).unwrap();
        let n = a.nrows();
        let b = vec![0.0; n];
        let osc: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let smooth: Vec<f64> = (0..n)
            .map(|i| (std::f64::consts::PI * (i + 1) as f64 / (n + 1) as f64).sin())
            .collect();
        let nrm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut x = osc.clone();
        gauss_seidel_sweep(&a, &mut x, &b).unwrap();
        assert!(nrm(&x) <= 0.5 * nrm(&osc));
        let mut y = smooth.clone();
        gauss_seidel_sweep(&a, &mut y, &b).unwrap();
        assert!(nrm(&y) > 0.9 * nrm(&smooth));
    }

    #[test]
    fn zero_diagonal_is_error() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 1, 1.0), (1, 0, 1.0)]);
        assert!(gauss_seidel_sweep(&a, &mut [0.0, 0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn two_grid_radius_is_size_independent() {
        let rho = |n: usize| {
            let a = assemble_qk_1d(1, n, &Coefficient::One).unwrap();
            tgm_spectral_radius(&build_hierarchy(&a, 1, 1, n, DEFAULT_COARSEST).unwrap()).unwrap()
        };
        let (r31, r63) = (rho(32), rho(64));
        assert!(r31 < 1.0 && (r31 - r63).abs() < 0.05, "{r31} {r63}");
    }

    #[test]
    fn quadratic_1d_iterations() {
        for n in [8, 64] {
            let a = assemble_qk_1d(2, n, &Coefficient::One).unwrap();
            let h = build_hierarchy(&a, 2, 1, n, DEFAULT_COARSEST).unwrap();
            let b = a.matvec(&vec![1.0; a.nrows()]);
            for mode in [CycleMode::TwoGrid, CycleMode::VCycle] {
                let out = multigrid_solve(&h, &b, 1e-6, 100, mode).unwrap();
                assert!(
                    (5..=9).contains(&out.iterations),
                    "n={n} {mode}: {}",
                    out.iterations
                );
            }
        }
    }
}
