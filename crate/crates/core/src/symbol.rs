//! Multivariate matrix-valued trigonometric polynomials.
//!
//! A symbol is stored by its Fourier blocks: `f(θ) = Σ_j f̂_j e^{i⟨j,θ⟩}`,
//! each `f̂_j` an `r×r` complex matrix in row-major order.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use faer::{c64, Mat, Side};
use rayon::prelude::*;

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::lagrange::{self, Rational};

/// Multi-index of a Fourier block, one entry per level.
pub type FreqIndex = Vec<i32>;

#[derive(Clone, Debug)]
pub struct MatrixSymbol {
    name: String,
    levels: usize,
    r: usize,
    blocks: BTreeMap<FreqIndex, Vec<c64>>,
    hermitian: bool,
}

const HERMITIAN_TOL: f64 = 1e-13;

impl MatrixSymbol {
    /// Builds a symbol from its Fourier blocks. With `hermitian` set, every
    /// stored `f̂_j` must equal `f̂_{-j}^*`.
    pub fn from_blocks(
        name: impl Into<String>,
        levels: usize,
        r: usize,
        blocks: BTreeMap<FreqIndex, Vec<c64>>,
        hermitian: bool,
    ) -> Result<Self> {
        if levels == 0 || r == 0 {
            return Err(Error::Domain(
                "symbol needs at least one level and r ≥ 1".into(),
            ));
        }
        for (j, b) in &blocks {
            if j.len() != levels || b.len() != r * r {
                return Err(Error::Domain(format!("block {j:?} has wrong shape")));
            }
        }
        let sym = Self {
            name: name.into(),
            levels,
            r,
            blocks,
            hermitian,
        };
        if hermitian {
            sym.check_hermitian_blocks()?;
        }
        Ok(sym)
    }

    fn check_hermitian_blocks(&self) -> Result<()> {
        let zero = vec![c64::new(0.0, 0.0); self.r * self.r];
        for (j, b) in &self.blocks {
            let neg: FreqIndex = j.iter().map(|v| -v).collect();
            let other = self.blocks.get(&neg).unwrap_or(&zero);
            for p in 0..self.r {
                for q in 0..self.r {
                    let d = b[p * self.r + q] - other[q * self.r + p].conj();
                    if d.norm() > HERMITIAN_TOL {
                        return Err(Error::Domain(format!(
                            "symbol {} flagged Hermitian but block {j:?} breaks f̂_j = f̂_-j^*",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn block_size(&self) -> usize {
        self.r
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&FreqIndex, &[c64])> {
        self.blocks.iter().map(|(j, b)| (j, b.as_slice()))
    }

    pub fn block(&self, j: &[i32]) -> Option<&[c64]> {
        self.blocks.get(j).map(Vec::as_slice)
    }

    /// Largest `|j_l|` over stored blocks for level `l`.
    pub fn degree(&self, level: usize) -> usize {
        self.blocks
            .keys()
            .map(|j| j[level].unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn evaluate(&self, theta: &[f64]) -> Mat<c64> {
        assert_eq!(theta.len(), self.levels, "θ has wrong number of components");
        let r = self.r;
        let mut m = Mat::<c64>::zeros(r, r);
        for (j, b) in &self.blocks {
            let phase: f64 = j.iter().zip(theta).map(|(&jl, &t)| jl as f64 * t).sum();
            let e = c64::new(phase.cos(), phase.sin());
            for p in 0..r {
                for q in 0..r {
                    m[(p, q)] += b[p * r + q] * e;
                }
            }
        }
        if self.hermitian {
            for p in 0..r {
                m[(p, p)].im = 0.0;
                for q in (p + 1)..r {
                    let avg = (m[(p, q)] + m[(q, p)].conj()) * 0.5;
                    m[(p, q)] = avg;
                    m[(q, p)] = avg.conj();
                }
            }
        }
        m
    }

    /// Sorted eigenvalues of `f(θ)`; requires a Hermitian symbol.
    pub fn eigenvalues(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if !self.hermitian {
            return Err(Error::Domain(format!(
                "symbol {} is not Hermitian",
                self.name
            )));
        }
        hermitian_eigenvalues(&self.evaluate(theta))
    }

    /// Returns `c·f`.
    pub fn scaled(&self, c: f64) -> Self {
        let blocks = self
            .blocks
            .iter()
            .map(|(j, b)| (j.clone(), b.iter().map(|v| v * c).collect()))
            .collect();
        Self {
            name: format!("{}*{c}", self.name),
            blocks,
            ..self.clone()
        }
    }

    /// Returns `f + c·E_r` at every θ, `E_r` the all-ones `r×r` matrix.
    pub fn plus_constant_ones(&self, c: f64) -> Self {
        let mut out = self.clone();
        let b = out
            .blocks
            .entry(vec![0; self.levels])
            .or_insert_with(|| vec![c64::new(0.0, 0.0); self.r * self.r]);
        b.iter_mut().for_each(|v| *v += c);
        out
    }

    /// Looks up a built-in symbol: `f_P1`, `f_P2`, `f_P3`, `f_Q1`..`f_Q8`,
    /// `p_Q1`, `p_Q2`, `p_Q3`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "f_P1" => Ok(f_p1()),
            "f_P2" => Ok(f_p2()),
            "f_P3" => Ok(f_p3()),
            "p_Q1" => Ok(p_q1()),
            "p_Q2" => Ok(p_q2()),
            "p_Q3" => Ok(p_q3()),
            _ => match name
                .strip_prefix("f_Q")
                .and_then(|k| k.parse::<usize>().ok())
            {
                Some(k) => f_qk_1d(k),
                None => Err(Error::Domain(format!("unknown symbol {name}"))),
            },
        }
    }
}

/// Sorted eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &Mat<c64>) -> Result<Vec<f64>> {
    if m.nrows() == 1 {
        return Ok(vec![m[(0, 0)].re]);
    }
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Factorization(format!("Hermitian eigensolver: {e:?}")))
}

/// Accumulates entry-wise trigonometric terms `c·e^{i⟨j,θ⟩}`.
struct TermBuilder {
    levels: usize,
    r: usize,
    blocks: BTreeMap<FreqIndex, Vec<c64>>,
}

impl TermBuilder {
    fn new(levels: usize, r: usize) -> Self {
        Self {
            levels,
            r,
            blocks: BTreeMap::new(),
        }
    }

    fn add(&mut self, p: usize, q: usize, c: f64, j: &[i32]) {
        let r = self.r;
        let b = self
            .blocks
            .entry(j.to_vec())
            .or_insert_with(|| vec![c64::new(0.0, 0.0); r * r]);
        b[p * r + q] += c;
    }

    /// Adds the term to `(p, q)` and its conjugate to `(q, p)`.
    fn add_sym(&mut self, p: usize, q: usize, c: f64, j: &[i32]) {
        self.add(p, q, c, j);
        if p != q {
            let neg: Vec<i32> = j.iter().map(|v| -v).collect();
            self.add(q, p, c, &neg);
        }
    }

    fn build(self, name: &str, hermitian: bool) -> MatrixSymbol {
        MatrixSymbol::from_blocks(name, self.levels, self.r, self.blocks, hermitian)
            .expect("built-in symbol is well formed")
    }
}

pub fn f_p1() -> MatrixSymbol {
    let mut t = TermBuilder::new(2, 1);
    t.add(0, 0, 4.0, &[0, 0]);
    for j in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
        t.add(0, 0, -1.0, &j);
    }
    t.build("f_P1", true)
}

pub fn f_p2() -> MatrixSymbol {
    let (alpha, beta, gamma) = (16.0 / 3.0, 4.0 / 3.0, 4.0);
    let mut t = TermBuilder::new(2, 4);
    let o = [0, 0];
    let (e1, e2) = ([1, 0], [0, 1]);
    for d in 0..3 {
        t.add(d, d, alpha, &o);
    }
    t.add_sym(0, 1, -beta, &o);
    t.add_sym(0, 1, -beta, &e1);
    t.add_sym(0, 2, -beta, &o);
    t.add_sym(0, 2, -beta, &e2);
    t.add_sym(1, 3, -beta, &o);
    t.add_sym(1, 3, -beta, &e2);
    t.add_sym(2, 3, -beta, &o);
    t.add_sym(2, 3, -beta, &e1);
    t.add(3, 3, gamma, &o);
    for j in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
        t.add(3, 3, beta / 4.0, &j);
    }
    t.build("f_P2", true)
}

pub fn f_p3() -> MatrixSymbol {
    let alpha = 81.0 / 10.0;
    let beta = 27.0 / 4.0;
    let gamma = 3.0 / 40.0;
    let delta = 57.0 / 80.0;
    let eps = 21.0 / 16.0;
    let zeta = 17.0 / 5.0;
    let eta = 7.0 / 40.0;
    let mut t = TermBuilder::new(2, 9);
    let o = [0, 0];
    let e1 = [1, 0];
    let e2 = [0, 1];
    let e1e2 = [1, 1];
    let e1c2 = [1, -1];
    let c1e2 = [-1, 1];
    let c1 = [-1, 0];

    for d in [0, 4] {
        t.add(d, d, alpha, &o);
    }
    for d in [1, 2, 3, 5, 6, 7] {
        t.add(d, d, beta, &o);
    }
    let a4 = -alpha / 4.0;
    t.add_sym(0, 1, a4, &o);
    t.add_sym(0, 2, a4, &e1);
    t.add_sym(0, 3, a4, &o);
    t.add_sym(0, 6, a4, &e2);
    t.add_sym(1, 4, a4, &o);
    t.add_sym(3, 4, a4, &o);
    t.add_sym(4, 5, a4, &o);
    t.add_sym(4, 7, a4, &o);

    let b4 = beta / 4.0;
    let b20 = beta / 20.0;
    t.add_sym(1, 2, -b4, &o);
    t.add_sym(1, 2, b20, &e1);
    t.add_sym(1, 3, -beta / 5.0, &o);
    t.add_sym(1, 5, b20, &o);
    t.add_sym(1, 5, b20, &e1);
    t.add_sym(1, 6, b20, &o);
    t.add_sym(1, 6, b20, &e2);
    t.add_sym(1, 7, b20, &o);
    t.add_sym(1, 7, -b4, &e2);
    t.add_sym(2, 3, b20, &o);
    t.add_sym(2, 3, b20, &c1);
    t.add_sym(2, 5, -beta / 2.0, &o);
    t.add_sym(3, 5, b20, &o);
    t.add_sym(3, 5, -b4, &e1);
    t.add_sym(3, 6, -b4, &o);
    t.add_sym(3, 6, b20, &e2);
    t.add_sym(3, 7, b20, &o);
    t.add_sym(3, 7, b20, &e2);
    t.add_sym(6, 7, -beta / 2.0, &o);

    // last column
    for p in [1, 3] {
        t.add_sym(p, 8, -gamma, &o);
        t.add_sym(p, 8, gamma, &e1);
        t.add_sym(p, 8, gamma, &e2);
        t.add_sym(p, 8, -gamma, &e1e2);
    }
    let g2 = gamma / 2.0;
    t.add_sym(2, 8, delta, &o);
    t.add_sym(2, 8, -g2, &e1);
    t.add_sym(2, 8, -eps, &e2);
    t.add_sym(2, 8, -g2, &c1e2);
    t.add_sym(5, 8, -eps, &o);
    t.add_sym(5, 8, -g2, &e1);
    t.add_sym(5, 8, delta, &e2);
    t.add_sym(5, 8, -g2, &c1e2);
    t.add_sym(6, 8, delta, &o);
    t.add_sym(6, 8, -eps, &e1);
    t.add_sym(6, 8, -g2, &e1c2);
    t.add_sym(6, 8, -g2, &e2);
    t.add_sym(7, 8, -eps, &o);
    t.add_sym(7, 8, delta, &e1);
    t.add_sym(7, 8, -g2, &e1c2);
    t.add_sym(7, 8, -g2, &e2);
    t.add(8, 8, zeta, &o);
    for j in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
        t.add(8, 8, -eta, &j);
    }
    t.build("f_P3", true)
}

/// `f_k(θ) = K_0 + K_1 e^{iθ} + K_1^T e^{-iθ}` for `Q_k` (equivalently `P_k`) in 1D.
pub fn f_qk_1d(k: usize) -> Result<MatrixSymbol> {
    let b = lagrange::build_1d_symbol_blocks(k)?;
    let to_c = |v: Vec<f64>| v.into_iter().map(|x| c64::new(x, 0.0)).collect::<Vec<_>>();
    let k1 = b.k1_f64();
    let k1t: Vec<f64> = (0..k * k).map(|idx| k1[(idx % k) * k + idx / k]).collect();
    let mut blocks = BTreeMap::new();
    blocks.insert(vec![0], to_c(b.k0_f64()));
    blocks.insert(vec![1], to_c(k1));
    blocks.insert(vec![-1], to_c(k1t));
    MatrixSymbol::from_blocks(format!("f_Q{k}"), 1, k, blocks, true)
}

fn rational_blocks(
    name: &str,
    r: usize,
    entries: &[(i32, [[(i128, i128); 3]; 3])],
) -> MatrixSymbol {
    let blocks = entries
        .iter()
        .map(|(j, m)| {
            let data = (0..r * r)
                .map(|idx| {
                    let (n, d) = m[idx / r][idx % r];
                    c64::new(lagrange::to_f64(Rational::new(n, d)), 0.0)
                })
                .collect();
            (vec![*j], data)
        })
        .collect();
    MatrixSymbol::from_blocks(name, 1, r, blocks, false).expect("projector symbol is well formed")
}

/// Scalar projector symbol `1 + cos θ`.
pub fn p_q1() -> MatrixSymbol {
    let mut t = TermBuilder::new(1, 1);
    t.add(0, 0, 1.0, &[0]);
    t.add(0, 0, 0.5, &[1]);
    t.add(0, 0, 0.5, &[-1]);
    t.build("p_Q1", false)
}

pub fn p_q2() -> MatrixSymbol {
    const Z: (i128, i128) = (0, 1);
    rational_blocks(
        "p_Q2",
        2,
        &[
            (0, [[(3, 4), (3, 8), Z], [Z, (1, 1), Z], [Z; 3]]),
            (1, [[Z, (3, 8), Z], [Z, Z, Z], [Z; 3]]),
            (-1, [[(3, 4), (-1, 8), Z], [(1, 1), Z, Z], [Z; 3]]),
            (2, [[Z, (-1, 8), Z], [Z, Z, Z], [Z; 3]]),
        ],
    )
}

pub fn p_q3() -> MatrixSymbol {
    const Z: (i128, i128) = (0, 1);
    rational_blocks(
        "p_Q3",
        3,
        &[
            (
                0,
                [
                    [Z, (1, 1), Z],
                    [(-5, 16), (15, 16), (5, 16)],
                    [Z, Z, (1, 1)],
                ],
            ),
            (1, [[Z, Z, (5, 16)], [Z, Z, Z], [Z, Z, (-1, 16)]]),
            (
                -1,
                [
                    [(15, 16), (-5, 16), (1, 16)],
                    [(1, 1), Z, Z],
                    [(9, 16), (9, 16), (-1, 16)],
                ],
            ),
            (2, [[Z, Z, Z], [Z, Z, (1, 16)], [Z, Z, Z]]),
        ],
    )
}

/// Periodic grid `θ_m = -π + 2πm/g`, `m = 0..g`.
pub fn periodic_grid(g: usize) -> Vec<f64> {
    (0..g)
        .map(|m| -PI + 2.0 * PI * m as f64 / g as f64)
        .collect()
}

/// Multi-index `m` of the `flat`-th point of a `g^t` product grid, first level outermost.
fn unflatten(mut flat: usize, g: usize, levels: usize) -> Vec<usize> {
    let mut out = vec![0; levels];
    for l in (0..levels).rev() {
        out[l] = flat % g;
        flat /= g;
    }
    out
}

/// Eigenvalue surfaces `s_1 ≤ … ≤ s_r` sampled on a periodic product grid.
#[derive(Clone, Debug)]
pub struct SurfaceSample {
    pub levels: usize,
    pub g: usize,
    pub r: usize,
    /// `values[p * r + i]` is `s_{i+1}` at grid point `p`.
    pub values: Vec<f64>,
}

impl SurfaceSample {
    pub fn points(&self) -> usize {
        self.g.pow(self.levels as u32)
    }

    pub fn theta(&self, point: usize) -> Vec<f64> {
        let grid = periodic_grid(self.g);
        unflatten(point, self.g, self.levels)
            .into_iter()
            .map(|m| grid[m])
            .collect()
    }

    pub fn at(&self, point: usize) -> &[f64] {
        &self.values[point * self.r..(point + 1) * self.r]
    }
}

pub fn eig_surfaces(sym: &MatrixSymbol, g: usize) -> Result<SurfaceSample> {
    if !sym.is_hermitian() {
        return Err(Error::Domain(format!(
            "symbol {} is not Hermitian",
            sym.name()
        )));
    }
    if g < 2 {
        return Err(Error::Domain("surface grid needs g ≥ 2".into()));
    }
    let levels = sym.levels();
    let grid = periodic_grid(g);
    let n_points = g.pow(levels as u32);
    let per_point: Vec<Vec<f64>> = (0..n_points)
        .into_par_iter()
        .map(|p| {
            let theta: Vec<f64> = unflatten(p, g, levels)
                .into_iter()
                .map(|m| grid[m])
                .collect();
            sym.eigenvalues(&theta)
        })
        .collect::<Result<_>>()?;
    Ok(SurfaceSample {
        levels,
        g,
        r: sym.block_size(),
        values: per_point.concat(),
    })
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SurfaceExtremum {
    /// 1-based surface index.
    pub surface: usize,
    pub min: f64,
    pub argmin: Vec<f64>,
    pub max: f64,
    pub argmax: Vec<f64>,
}

/// Min and max of every surface. Ties keep the first grid point in
/// lexicographic order.
pub fn surface_extrema(s: &SurfaceSample) -> Vec<SurfaceExtremum> {
    (0..s.r)
        .map(|i| {
            let (mut pmin, mut pmax) = (0, 0);
            for p in 0..s.points() {
                let v = s.at(p)[i];
                if v < s.at(pmin)[i] {
                    pmin = p;
                }
                if v > s.at(pmax)[i] {
                    pmax = p;
                }
            }
            SurfaceExtremum {
                surface: i + 1,
                min: s.at(pmin)[i],
                argmin: s.theta(pmin),
                max: s.at(pmax)[i],
                argmax: s.theta(pmax),
            }
        })
        .collect()
}

/// Default ratio between sample count and target length for variable coefficients.
pub const DEFAULT_OVERSAMPLING: usize = 16;

/// Sorted samples of `λ_i(a(x) f(θ))` over a uniform `(x, θ)` product grid,
/// linearly resampled to exactly `target` values.
///
/// `x` uses cell midpoints of `[0,1]^t`, `θ` the periodic grid. A constant
/// coefficient collapses the `x` grid to a single point. Without an explicit
/// `grid`, the smallest per-axis count reaching `target` samples is used,
/// times [`DEFAULT_OVERSAMPLING`] when `a` varies.
pub fn rearranged_sampling(
    sym: &MatrixSymbol,
    a: &Coefficient,
    target: usize,
    grid: Option<usize>,
) -> Result<Vec<f64>> {
    if !sym.is_hermitian() {
        return Err(Error::Domain(format!(
            "symbol {} is not Hermitian",
            sym.name()
        )));
    }
    if target == 0 {
        return Ok(Vec::new());
    }
    let t = sym.levels();
    let r = sym.block_size();
    let constant = a.is_constant();
    let dims = if constant { t } else { 2 * t };
    let needed = if constant {
        target
    } else {
        target * DEFAULT_OVERSAMPLING
    };
    let g = match grid {
        Some(g) => g,
        None => (2..)
            .find(|g: &usize| g.pow(dims as u32) * r >= needed)
            .expect("finite"),
    };
    if g < 2 || g.pow(dims as u32) * r < target {
        return Err(Error::Domain(format!(
            "grid {g} yields fewer than {target} samples"
        )));
    }
    let surfaces = eig_surfaces(sym, g)?;
    let x_points: Vec<Vec<f64>> = if constant {
        vec![vec![0.5; t]]
    } else {
        (0..g.pow(t as u32))
            .map(|p| {
                unflatten(p, g, t)
                    .into_iter()
                    .map(|m| (m as f64 + 0.5) / g as f64)
                    .collect()
            })
            .collect()
    };
    let mut a_vals = Vec::with_capacity(x_points.len());
    for x in &x_points {
        let v = a.eval(x);
        if !(v > 0.0) {
            return Err(Error::Domain(format!(
                "coefficient {} nonpositive at {x:?}",
                a.name()
            )));
        }
        a_vals.push(v);
    }
    let mut samples: Vec<f64> = a_vals
        .iter()
        .flat_map(|&av| surfaces.values.iter().map(move |&s| av * s))
        .collect();
    samples.sort_by(f64::total_cmp);
    Ok(linear_resample(&samples, target))
}

/// Resamples an ascending vector to `n` values by linear interpolation in index.
pub fn linear_resample(sorted: &[f64], n: usize) -> Vec<f64> {
    let m = sorted.len();
    if n == m {
        return sorted.to_vec();
    }
    if n == 1 || m == 1 {
        return vec![sorted[0]; n];
    }
    (0..n)
        .map(|i| {
            let pos = i as f64 * (m - 1) as f64 / (n - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(m - 1);
            let w = pos - lo as f64;
            sorted[lo] * (1.0 - w) + sorted[hi] * w
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn det(m: &Mat<c64>) -> c64 {
        m.determinant()
    }

    #[test]
    fn p1_values() {
        let f = f_p1();
        assert!(f.evaluate(&[0.0, 0.0])[(0, 0)].norm() < 1e-15);
        assert!((f.evaluate(&[PI, PI])[(0, 0)].re - 8.0).abs() < 1e-14);
    }

    #[test]
    fn p2_entry_and_kernel() {
        let f = f_p2();
        let m = f.evaluate(&[0.0, 0.7]);
        assert!((m[(0, 1)].re + 8.0 / 3.0).abs() < 1e-14);
        let m0 = f.evaluate(&[0.0, 0.0]);
        for p in 0..4 {
            let s: c64 = (0..4).map(|q| m0[(p, q)]).sum();
            assert!(s.norm() < 1e-13);
        }
    }

    #[test]
    fn p3_kernel() {
        let m0 = f_p3().evaluate(&[0.0, 0.0]);
        for p in 0..9 {
            let s: c64 = (0..9).map(|q| m0[(p, q)]).sum();
            assert!(s.norm() < 1e-12, "row {p} sums to {s}");
        }
    }

    #[test]
    fn det_p2_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = f_p2();
        for _ in 0..200 {
            let t = [rng.random_range(-PI..PI), rng.random_range(-PI..PI)];
            let d = det(&f.evaluate(&t));
            let expect = 4096.0 / 81.0
                * ((2.0 - 2.0 * t[0].cos()) + (2.0 - 2.0 * t[1].cos()) + 1.0
                    - t[0].cos() * t[1].cos());
            assert!(
                (d.re - expect).abs() <= 1e-12 * expect.abs().max(1.0),
                "{d} vs {expect}"
            );
        }
    }

    #[test]
    fn qk_known_blocks() {
        let f1 = f_qk_1d(1).unwrap();
        for th in [0.0, 0.3, PI] {
            assert!((f1.evaluate(&[th])[(0, 0)].re - (2.0 - 2.0 * th.cos())).abs() < 1e-14);
        }
        let f2 = f_qk_1d(2).unwrap();
        let m = f2.evaluate(&[0.4]);
        assert!((m[(1, 1)].re - (14.0 / 3.0 + 2.0 / 3.0 * 0.4f64.cos())).abs() < 1e-14);
    }

    #[test]
    fn projector_determinants() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let t: f64 = rng.random_range(-PI..PI);
            let z = c64::new(t.cos(), t.sin());
            let one = c64::new(1.0, 0.0);
            let d2 = det(&p_q2().evaluate(&[t]));
            let e2 = (one + z).powi(3) * z.powi(-2) / 8.0;
            assert!((d2 - e2).norm() < 1e-13);
            let d3 = det(&p_q3().evaluate(&[t]));
            let e3 = (one + z).powi(4) * z.powi(-3) / 64.0;
            assert!((d3 - e3).norm() < 1e-13);
        }
    }

    #[test]
    fn hermitian_flag_enforced() {
        let mut blocks = BTreeMap::new();
        blocks.insert(vec![1], vec![c64::new(1.0, 0.0)]);
        assert!(MatrixSymbol::from_blocks("bad", 1, 1, blocks, true).is_err());
    }

    #[test]
    fn unknown_builtin() {
        assert!(MatrixSymbol::builtin("f_P9").is_err());
        assert!(MatrixSymbol::builtin("f_Q4").is_ok());
    }

    #[test]
    fn surfaces_p1_small_grid() {
        let s = eig_surfaces(&f_p1(), 4).unwrap();
        // θ ∈ {-π, -π/2, 0, π/2}
        let mut v = s.values.clone();
        v.sort_by(f64::total_cmp);
        assert!(v[0].abs() < 1e-14);
        assert!((v[15] - 8.0).abs() < 1e-14);
        let ex = surface_extrema(&s);
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].argmin, vec![0.0, 0.0]);
        assert_eq!(ex[0].argmax, vec![-PI, -PI]);
    }

    #[test]
    fn p2_surface_extrema_coarse() {
        let ex = surface_extrema(&eig_surfaces(&f_p2(), 64).unwrap());
        assert!(ex[0].min.abs() < 1e-10);
        assert!((ex[0].max - 8.0 / 3.0).abs() < 1e-12);
        assert!((ex[3].min - 16.0 / 3.0).abs() < 1e-12);
        assert!((ex[3].max - 32.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn resample_identity_and_endpoints() {
        let v = [1.0, 2.0, 4.0];
        assert_eq!(linear_resample(&v, 3), v.to_vec());
        let w = linear_resample(&v, 5);
        assert_eq!(w, vec![1.0, 1.5, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn rearranged_constant_coefficient() {
        let one = Coefficient::one();
        let s = rearranged_sampling(&f_p1(), &one, 9, None).unwrap();
        let grid = periodic_grid(3);
        let mut expect: Vec<f64> = grid
            .iter()
            .flat_map(|a| {
                grid.iter()
                    .map(move |b| 4.0 - 2.0 * a.cos() - 2.0 * b.cos())
            })
            .collect();
        expect.sort_by(f64::total_cmp);
        for (x, y) in s.iter().zip(&expect) {
            assert!((x - y).abs() < 1e-13);
        }
        let two = Coefficient::constant(2.0);
        let s2 = rearranged_sampling(&f_p2(), &two, 100, None).unwrap();
        let s1 = rearranged_sampling(&f_p2(), &one, 100, None).unwrap();
        for (x, y) in s2.iter().zip(&s1) {
            assert_eq!(*x, 2.0 * y);
        }
    }
}
