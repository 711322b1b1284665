//! Multilevel block Toeplitz and block circulant matrices generated by a
//! [`MatrixSymbol`].
//!
//! Global index of entry `p` of block `i = (i_1, …, i_t)` is
//! `flat(i)·r + p`, with level 1 outermost in `flat`. Block `(i, l)` of
//! `T_n(f)` is `f̂_{i−l}`.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::{c64, Mat, Side};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::symbol::MatrixSymbol;

/// Largest dimension materialized densely.
pub const DENSE_LIMIT: usize = 4000;

fn zero() -> c64 {
    c64::new(0.0, 0.0)
}

fn flat_index(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &n)| acc * n + i)
}

fn unflat(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for l in (0..dims.len()).rev() {
        out[l] = flat % dims[l];
        flat /= dims[l];
    }
    out
}

/// In-place multidimensional FFT over a row-major array with shape `dims`.
#[derive(Clone)]
struct NdFft {
    dims: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for NdFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NdFft").field("dims", &self.dims).finish()
    }
}

impl NdFft {
    fn new(dims: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            dims: dims.to_vec(),
            forward: dims.iter().map(|&n| planner.plan_fft_forward(n)).collect(),
            inverse: dims.iter().map(|&n| planner.plan_fft_inverse(n)).collect(),
        }
    }

    fn len(&self) -> usize {
        self.dims.iter().product()
    }

    /// `sign = -1` uses `e^{-iωx}`, `sign = +1` uses `e^{+iωx}`; unnormalized.
    fn run(&self, data: &mut [c64], sign: i32) {
        let total = self.len();
        let mut line = Vec::new();
        for (axis, &n) in self.dims.iter().enumerate() {
            let plan = if sign < 0 {
                &self.forward[axis]
            } else {
                &self.inverse[axis]
            };
            let stride: usize = self.dims[axis + 1..].iter().product();
            let outer = total / (n * stride);
            line.resize(n, zero());
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * n * stride + s;
                    for (m, v) in line.iter_mut().enumerate() {
                        *v = data[base + m * stride];
                    }
                    plan.process(&mut line);
                    for (m, v) in line.iter().enumerate() {
                        data[base + m * stride] = *v;
                    }
                }
            }
        }
    }
}

/// Implicit `T_n(f)` with FFT matvec through a circulant embedding of size
/// `2n_l` per level.
pub struct BlockToeplitzOperator {
    symbol: MatrixSymbol,
    n: Vec<usize>,
    fft: NdFft,
    /// Transformed coefficient arrays, one per `(p, q)` pair.
    spectra: Vec<Vec<c64>>,
}

impl BlockToeplitzOperator {
    pub fn new(symbol: &MatrixSymbol, n: &[usize]) -> Result<Self> {
        check_shape(symbol, n)?;
        let r = symbol.block_size();
        let emb: Vec<usize> = n.iter().map(|&v| 2 * v).collect();
        let fft = NdFft::new(&emb);
        let mut spectra = vec![vec![zero(); fft.len()]; r * r];
        for (j, b) in symbol.blocks() {
            let pos: Vec<usize> = j
                .iter()
                .zip(&emb)
                .map(|(&jl, &m)| (jl.rem_euclid(m as i32)) as usize)
                .collect();
            let at = flat_index(&pos, &emb);
            for (pq, v) in b.iter().enumerate() {
                spectra[pq][at] += *v;
            }
        }
        for s in &mut spectra {
            fft.run(s, -1);
        }
        Ok(Self {
            symbol: symbol.clone(),
            n: n.to_vec(),
            fft,
            spectra,
        })
    }

    pub fn symbol(&self) -> &MatrixSymbol {
        &self.symbol
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn dim(&self) -> usize {
        self.symbol.block_size() * self.n.iter().product::<usize>()
    }

    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        assert_eq!(x.len(), self.dim());
        let r = self.symbol.block_size();
        let emb = &self.fft.dims;
        let blocks: usize = self.n.iter().product();
        let padded: Vec<Vec<c64>> = (0..r)
            .map(|q| {
                let mut v = vec![zero(); self.fft.len()];
                for b in 0..blocks {
                    v[flat_index(&unflat(b, &self.n), emb)] = x[b * r + q];
                }
                self.fft.run(&mut v, -1);
                v
            })
            .collect();
        let scale = 1.0 / self.fft.len() as f64;
        let mut y = vec![zero(); x.len()];
        for p in 0..r {
            let mut acc = vec![zero(); self.fft.len()];
            for q in 0..r {
                let s = &self.spectra[p * r + q];
                acc.iter_mut()
                    .zip(s)
                    .zip(&padded[q])
                    .for_each(|((a, s), x)| *a += s * x);
            }
            self.fft.run(&mut acc, 1);
            for b in 0..blocks {
                y[b * r + p] = acc[flat_index(&unflat(b, &self.n), emb)] * scale;
            }
        }
        y
    }

    /// Matvec for symbols with real Fourier blocks.
    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        let xc: Vec<c64> = x.iter().map(|&v| c64::new(v, 0.0)).collect();
        self.apply(&xc).into_iter().map(|v| v.re).collect()
    }

    pub fn dense(&self) -> Result<Mat<c64>> {
        let dim = self.dim();
        if dim > DENSE_LIMIT {
            return Err(Error::TooLarge {
                dim,
                limit: DENSE_LIMIT,
            });
        }
        let r = self.symbol.block_size();
        let blocks: usize = self.n.iter().product();
        let mut m = Mat::<c64>::zeros(dim, dim);
        for bi in 0..blocks {
            let i = unflat(bi, &self.n);
            for bl in 0..blocks {
                let l = unflat(bl, &self.n);
                let j: Vec<i32> = i
                    .iter()
                    .zip(&l)
                    .map(|(&a, &b)| a as i32 - b as i32)
                    .collect();
                if let Some(f) = self.symbol.block(&j) {
                    for p in 0..r {
                        for q in 0..r {
                            m[(bi * r + p, bl * r + q)] = f[p * r + q];
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    /// Dense real matrix; fails if any entry has an imaginary part.
    pub fn dense_real(&self) -> Result<Mat<f64>> {
        let m = self.dense()?;
        let mut out = Mat::<f64>::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)].im.abs() > 1e-14 {
                    return Err(Error::Domain("Toeplitz matrix has complex entries".into()));
                }
                out[(i, j)] = m[(i, j)].re;
            }
        }
        Ok(out)
    }

    /// Sparse real form, built directly from the Fourier blocks.
    pub fn to_csr(&self) -> Result<CsrMatrix> {
        let r = self.symbol.block_size();
        let blocks: usize = self.n.iter().product();
        let mut t = Vec::new();
        for bi in 0..blocks {
            let i = unflat(bi, &self.n);
            for (j, f) in self.symbol.blocks() {
                let l: Option<Vec<usize>> = i
                    .iter()
                    .zip(j)
                    .zip(&self.n)
                    .map(|((&a, &d), &nl)| {
                        let v = a as i64 - d as i64;
                        (0..nl as i64).contains(&v).then_some(v as usize)
                    })
                    .collect();
                let Some(l) = l else { continue };
                let bl = flat_index(&l, &self.n);
                for p in 0..r {
                    for q in 0..r {
                        let v = f[p * r + q];
                        if v.im.abs() > 1e-14 {
                            return Err(Error::Domain(
                                "Toeplitz matrix has complex entries".into(),
                            ));
                        }
                        if v.re != 0.0 {
                            t.push((bi * r + p, bl * r + q, v.re));
                        }
                    }
                }
            }
        }
        Ok(CsrMatrix::from_triplets(self.dim(), self.dim(), &t))
    }
}

fn check_shape(symbol: &MatrixSymbol, n: &[usize]) -> Result<()> {
    if n.len() != symbol.levels() {
        return Err(Error::Domain(format!(
            "symbol {} has {} levels, got {} block counts",
            symbol.name(),
            symbol.levels(),
            n.len()
        )));
    }
    for (l, &nl) in n.iter().enumerate() {
        if symbol.degree(l) >= nl {
            return Err(Error::Domain(format!(
                "degree {} of level {} not below n = {nl}",
                symbol.degree(l),
                l + 1
            )));
        }
    }
    Ok(())
}

/// Indices kept by the level-wise principal cut.
///
/// The local index `p < r = k^t` is read as `t` base-`k` digits, level 1
/// least significant. An index is dropped when, on some level, its block sits
/// in the last position and its digit is `k − 1`.
pub fn cut_indices(n: &[usize], r: usize) -> Result<Vec<usize>> {
    let t = n.len();
    let k = (1..=r).find(|k| k.pow(t as u32) == r).ok_or_else(|| {
        Error::Domain(format!(
            "block size {r} is not a {t}-th power; level-wise cut undefined"
        ))
    })?;
    let blocks: usize = n.iter().product();
    let mut kept = Vec::new();
    for b in 0..blocks {
        let bi = unflat(b, n);
        for p in 0..r {
            let dropped = (0..t).any(|l| {
                let digit = (p / k.pow(l as u32)) % k;
                bi[l] == n[l] - 1 && digit == k - 1
            });
            if !dropped {
                kept.push(b * r + p);
            }
        }
    }
    Ok(kept)
}

/// The principal submatrix of `T_n(f)` matching the internal FEM degrees of
/// freedom: per level, the last row and column of the last block are removed.
pub fn cut_principal(op: &BlockToeplitzOperator) -> Result<Mat<f64>> {
    let full = op.dense_real()?;
    let keep = cut_indices(op.n(), op.symbol().block_size())?;
    Ok(Mat::from_fn(keep.len(), keep.len(), |i, j| {
        full[(keep[i], keep[j])]
    }))
}

/// Strang-type correction added to a PSD symbol before building the circulant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrangCorrection {
    /// `f(θ) + h²·E_r` at every frequency.
    PerBlock,
    /// `C_n(f) + h²·e eᵀ` with `e` the all-ones vector of the full dimension.
    Global,
}

/// `C_n(f)` stored by its samples `f(2πj/n)` and their Hermitian
/// eigendecompositions.
#[derive(Clone, Debug)]
pub struct BlockCirculantMatrix {
    n: Vec<usize>,
    r: usize,
    fft: NdFft,
    samples: Vec<Mat<c64>>,
    eig: Option<Vec<(Mat<c64>, Vec<f64>)>>,
}

impl BlockCirculantMatrix {
    pub fn new(symbol: &MatrixSymbol, n: &[usize]) -> Result<Self> {
        check_shape(symbol, n)?;
        let blocks: usize = n.iter().product();
        let samples = (0..blocks)
            .map(|b| {
                let theta: Vec<f64> = unflat(b, n)
                    .iter()
                    .zip(n)
                    .map(|(&j, &nl)| 2.0 * PI * j as f64 / nl as f64)
                    .collect();
                symbol.evaluate(&theta)
            })
            .collect();
        Self::from_samples(n, symbol.block_size(), samples, symbol.is_hermitian())
    }

    fn from_samples(
        n: &[usize],
        r: usize,
        samples: Vec<Mat<c64>>,
        hermitian: bool,
    ) -> Result<Self> {
        let eig = if hermitian {
            let decomps = samples
                .iter()
                .map(|s| {
                    let e = s
                        .self_adjoint_eigen(Side::Lower)
                        .map_err(|e| Error::Factorization(format!("{e:?}")))?;
                    let vals = (0..r).map(|i| e.S()[i].re).collect();
                    Ok((e.U().to_owned(), vals))
                })
                .collect::<Result<Vec<_>>>()?;
            Some(decomps)
        } else {
            None
        };
        Ok(Self {
            n: n.to_vec(),
            r,
            fft: NdFft::new(n),
            samples,
            eig,
        })
    }

    /// Strang-corrected circulant preconditioner for a Hermitian PSD symbol.
    pub fn strang_corrected(
        symbol: &MatrixSymbol,
        n: &[usize],
        h: f64,
        mode: StrangCorrection,
    ) -> Result<Self> {
        let base = match mode {
            StrangCorrection::PerBlock => symbol.plus_constant_ones(h * h),
            StrangCorrection::Global => symbol.clone(),
        };
        let mut c = Self::new(&base, n)?;
        if mode == StrangCorrection::Global {
            let blocks: usize = n.iter().product();
            let add = h * h * blocks as f64;
            let s0 = &mut c.samples[0];
            for p in 0..c.r {
                for q in 0..c.r {
                    s0[(p, q)] += add;
                }
            }
            c = Self::from_samples(n, c.r, c.samples, true)?;
        }
        c.check_positive()?;
        Ok(c)
    }

    fn check_positive(&self) -> Result<()> {
        let eig = self
            .eig
            .as_ref()
            .ok_or_else(|| Error::Domain("circulant symbol is not Hermitian".into()))?;
        for (b, (_, vals)) in eig.iter().enumerate() {
            if vals.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::SingularBlock {
                    index: unflat(b, &self.n),
                });
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.r * self.n.iter().product::<usize>()
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    /// Block at frequency index `j`.
    pub fn sample(&self, j: &[usize]) -> &Mat<c64> {
        &self.samples[flat_index(j, &self.n)]
    }

    /// Sorted eigenvalues of all frequency blocks.
    pub fn block_eigenvalues(&self) -> Option<Vec<f64>> {
        self.eig.as_ref().map(|e| {
            let mut v: Vec<f64> = e.iter().flat_map(|(_, s)| s.iter().copied()).collect();
            v.sort_by(f64::total_cmp);
            v
        })
    }

    /// Applies `(F ⊗ I_r) diag(φ(g_j)) (F ⊗ I_r)^*` for a blockwise map `φ`.
    fn apply_blockwise(
        &self,
        x: &[c64],
        op: impl Fn(usize, &[c64]) -> Result<Vec<c64>>,
    ) -> Result<Vec<c64>> {
        assert_eq!(x.len(), self.dim());
        let r = self.r;
        let blocks = self.fft.len();
        let mut comps: Vec<Vec<c64>> = (0..r)
            .map(|q| {
                let mut v: Vec<c64> = (0..blocks).map(|b| x[b * r + q]).collect();
                self.fft.run(&mut v, 1);
                v
            })
            .collect();
        let mut local = vec![zero(); r];
        for b in 0..blocks {
            for q in 0..r {
                local[q] = comps[q][b];
            }
            let out = op(b, &local)?;
            for p in 0..r {
                comps[p][b] = out[p];
            }
        }
        let scale = 1.0 / blocks as f64;
        let mut y = vec![zero(); x.len()];
        for (p, v) in comps.iter_mut().enumerate() {
            self.fft.run(v, -1);
            for b in 0..blocks {
                y[b * r + p] = v[b] * scale;
            }
        }
        Ok(y)
    }

    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        let r = self.r;
        self.apply_blockwise(x, |b, v| {
            let s = &self.samples[b];
            Ok((0..r)
                .map(|p| (0..r).map(|q| s[(p, q)] * v[q]).sum())
                .collect())
        })
        .expect("matvec cannot fail")
    }

    fn spectral_apply(&self, x: &[c64], f: impl Fn(f64) -> f64) -> Result<Vec<c64>> {
        let eig = self
            .eig
            .as_ref()
            .ok_or_else(|| Error::Domain("circulant symbol is not Hermitian".into()))?;
        let r = self.r;
        self.apply_blockwise(x, |b, v| {
            let (u, vals) = &eig[b];
            if vals.iter().any(|&l| !(l > 0.0)) {
                return Err(Error::SingularBlock {
                    index: unflat(b, &self.n),
                });
            }
            let coef: Vec<c64> = (0..r)
                .map(|i| (0..r).map(|p| u[(p, i)].conj() * v[p]).sum::<c64>() * f(vals[i]))
                .collect();
            Ok((0..r)
                .map(|p| (0..r).map(|i| u[(p, i)] * coef[i]).sum())
                .collect())
        })
    }

    pub fn solve(&self, b: &[c64]) -> Result<Vec<c64>> {
        self.spectral_apply(b, |l| 1.0 / l)
    }

    pub fn apply_inverse_sqrt(&self, b: &[c64]) -> Result<Vec<c64>> {
        self.spectral_apply(b, |l| 1.0 / l.sqrt())
    }

    pub fn solve_real(&self, b: &[f64]) -> Result<Vec<f64>> {
        let bc: Vec<c64> = b.iter().map(|&v| c64::new(v, 0.0)).collect();
        Ok(self.solve(&bc)?.into_iter().map(|v| v.re).collect())
    }

    pub fn apply_inverse_sqrt_real(&self, b: &[f64]) -> Result<Vec<f64>> {
        let bc: Vec<c64> = b.iter().map(|&v| c64::new(v, 0.0)).collect();
        Ok(self
            .apply_inverse_sqrt(&bc)?
            .into_iter()
            .map(|v| v.re)
            .collect())
    }

    /// Dense matrix through the circulant definition `Σ_j Z^{j} ⊗ f̂_j`,
    /// reconstructed from the samples by an inverse DFT per block entry.
    pub fn dense(&self) -> Result<Mat<c64>> {
        let dim = self.dim();
        if dim > DENSE_LIMIT {
            return Err(Error::TooLarge {
                dim,
                limit: DENSE_LIMIT,
            });
        }
        let r = self.r;
        let blocks = self.fft.len();
        let mut coeffs = vec![vec![zero(); blocks]; r * r];
        for (b, s) in self.samples.iter().enumerate() {
            for p in 0..r {
                for q in 0..r {
                    coeffs[p * r + q][b] = s[(p, q)];
                }
            }
        }
        for c in &mut coeffs {
            self.fft.run(c, -1);
            c.iter_mut().for_each(|v| *v /= blocks as f64);
        }
        let mut m = Mat::<c64>::zeros(dim, dim);
        for bi in 0..blocks {
            let i = unflat(bi, &self.n);
            for bl in 0..blocks {
                let l = unflat(bl, &self.n);
                let j: Vec<usize> = i
                    .iter()
                    .zip(&l)
                    .zip(&self.n)
                    .map(|((&a, &b), &n)| (a + n - b) % n)
                    .collect();
                let at = flat_index(&j, &self.n);
                for p in 0..r {
                    for q in 0..r {
                        m[(bi * r + p, bl * r + q)] = coeffs[p * r + q][at];
                    }
                }
            }
        }
        Ok(m)
    }
}
