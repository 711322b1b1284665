//! Symbol-level checks of two-grid convergence for block projectors.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use faer::{c64, Mat};
use num_complex::Complex;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lagrange::{to_f64, Rational};
use crate::symbol::{hermitian_eigenvalues, MatrixSymbol};

type CRat = Complex<Rational>;

fn theta_grid(g: usize) -> Vec<f64> {
    (0..g).map(|m| 2.0 * PI * m as f64 / g as f64).collect()
}

fn adjoint(m: &Mat<c64>) -> Mat<c64> {
    Mat::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)].conj())
}

/// `p(θ)* p(θ) + p(θ+π)* p(θ+π)`.
fn gram_sum(p: &MatrixSymbol, theta: f64) -> Mat<c64> {
    let a = p.evaluate(&[theta]);
    let b = p.evaluate(&[theta + PI]);
    let s = adjoint(&a) * &a + adjoint(&b) * &b;
    Mat::from_fn(s.nrows(), s.ncols(), |i, j| {
        (s[(i, j)] + s[(j, i)].conj()) * 0.5
    })
}

fn check_univariate(s: &MatrixSymbol) -> Result<()> {
    if s.levels() != 1 {
        return Err(Error::Domain(format!(
            "symbol {} must be univariate",
            s.name()
        )));
    }
    Ok(())
}

/// Minimum eigenvalue of `p*p(θ) + p*p(θ+π)` over `θ = 2πm/g`.
pub fn condition_b_min(p: &MatrixSymbol, g: usize) -> Result<f64> {
    check_univariate(p)?;
    let mins = theta_grid(g)
        .into_par_iter()
        .map(|t| hermitian_eigenvalues(&gram_sum(p, t)).map(|e| e[0]))
        .collect::<Result<Vec<_>>>()?;
    Ok(mins.into_iter().fold(f64::INFINITY, f64::min))
}

/// Inverse square root of a Hermitian positive definite matrix.
fn inv_sqrt(m: &Mat<c64>) -> Result<Mat<c64>> {
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Factorization(format!("eigendecomposition: {e:?}")))?;
    let (u, s) = (evd.U(), evd.S());
    let n = m.nrows();
    let d: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    if d.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Domain("matrix is not positive definite".into()));
    }
    Ok(Mat::from_fn(n, n, |i, j| {
        (0..n)
            .map(|k| u[(i, k)] * u[(j, k)].conj() * (1.0 / d[k].sqrt()))
            .sum()
    }))
}

fn inverse(m: &Mat<c64>) -> Result<Mat<c64>> {
    let n = m.nrows();
    let lu = m.partial_piv_lu();
    let inv = faer::linalg::solvers::DenseSolveCore::inverse(&lu);
    if (0..n).any(|i| (0..n).any(|j| !inv[(i, j)].re.is_finite() || !inv[(i, j)].im.is_finite())) {
        return Err(Error::Factorization(
            "singular q(θ): condition B fails".into(),
        ));
    }
    Ok(inv)
}

/// `R(θ)` for a Hermitian `f` and projector `p` with equal block size.
pub fn r_matrix(f: &MatrixSymbol, p: &MatrixSymbol, theta: f64) -> Result<Mat<c64>> {
    let r = f.block_size();
    let (f0, f1) = (f.evaluate(&[theta]), f.evaluate(&[theta + PI]));
    let (p0, p1) = (p.evaluate(&[theta]), p.evaluate(&[theta + PI]));
    let q = inverse(&gram_sum(p, theta))?;
    let stacked = Mat::from_fn(
        2 * r,
        r,
        |i, j| if i < r { p0[(i, j)] } else { p1[(i - r, j)] },
    );
    let proj = &stacked * &q * adjoint(&stacked);
    let mid = Mat::from_fn(2 * r, 2 * r, |i, j| {
        let id = if i == j {
            c64::new(1.0, 0.0)
        } else {
            c64::new(0.0, 0.0)
        };
        id - proj[(i, j)]
    });
    let (s0, s1) = (inv_sqrt(&f0)?, inv_sqrt(&f1)?);
    let fs = Mat::from_fn(2 * r, 2 * r, |i, j| match (i < r, j < r) {
        (true, true) => s0[(i, j)],
        (false, false) => s1[(i - r, j - r)],
        _ => c64::new(0.0, 0.0),
    });
    let out = &fs * mid * &fs;
    Ok(Mat::from_fn(2 * r, 2 * r, |i, j| {
        (out[(i, j)] + out[(j, i)].conj()) * 0.5
    }))
}

/// Maximum of `λ_max(R(θ))` over `θ = 2πm/g`, skipping points within `δ` of
/// `0`, `π` and `2π` where `f(θ)` or `f(θ+π)` is singular.
pub fn condition_r_max(f: &MatrixSymbol, p: &MatrixSymbol, g: usize, delta: f64) -> Result<f64> {
    check_univariate(f)?;
    check_univariate(p)?;
    if f.block_size() != p.block_size() {
        return Err(Error::Domain("f and p need equal block sizes".into()));
    }
    let pts: Vec<f64> = theta_grid(g)
        .into_iter()
        .filter(|&t| [0.0, PI, 2.0 * PI].iter().all(|&s| (t - s).abs() >= delta))
        .collect();
    let maxes = pts
        .into_par_iter()
        .map(|t| {
            r_matrix(f, p, t)
                .and_then(|m| hermitian_eigenvalues(&m))
                .map(|e| *e.last().unwrap())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(maxes.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

/// `S(θ) = p(θ)p(θ+π) − p(θ+π)p(θ)`.
pub fn commutator(p: &MatrixSymbol, theta: f64) -> Result<Mat<c64>> {
    check_univariate(p)?;
    let a = p.evaluate(&[theta]);
    let b = p.evaluate(&[theta + PI]);
    Ok(&a * &b - &b * &a)
}

/// Laurent polynomial in `z = e^{iθ}` with exact complex rational coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct Laurent(pub(crate) BTreeMap<i32, CRat>);

impl Laurent {
    pub(crate) fn real(terms: impl IntoIterator<Item = (i32, Rational)>) -> Self {
        Self(
            terms
                .into_iter()
                .map(|(j, c)| (j, CRat::new(c, Rational::zero())))
                .collect(),
        )
        .trimmed()
    }

    /// Value at `z = e^{iθ}` given `det(1) = Σ c_j = 0` exactly, written as
    /// `Σ c_j (z^j − 1)` so nothing cancels near `θ = 0`.
    pub(crate) fn eval_vanishing_at_zero(&self, theta: f64) -> Result<c64> {
        let total = self.0.values().fold(CRat::zero(), |acc, c| acc + c);
        if !total.is_zero() {
            return Err(Error::Domain(
                "Laurent polynomial does not vanish at z = 1".into(),
            ));
        }
        Ok(self.0.iter().fold(c64::new(0.0, 0.0), |acc, (&j, c)| {
            let x = j as f64 * theta;
            let zm1 = c64::new(-2.0 * (x / 2.0).sin().powi(2), x.sin());
            acc + c64::new(to_f64(c.re), to_f64(c.im)) * zm1
        }))
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = BTreeMap::new();
        for (i, a) in &self.0 {
            for (j, b) in &o.0 {
                *out.entry(i + j).or_insert_with(CRat::zero) += a * b;
            }
        }
        Self(out).trimmed()
    }

    fn add(&self, o: &Self, sign: i128) -> Self {
        let mut out = self.0.clone();
        let s = CRat::new(Rational::from_integer(sign), Rational::zero());
        for (j, b) in &o.0 {
            *out.entry(*j).or_insert_with(CRat::zero) += b * s;
        }
        Self(out).trimmed()
    }

    fn trimmed(mut self) -> Self {
        self.0.retain(|_, v| !v.is_zero());
        self
    }
}

fn exact_rational(x: f64) -> Result<Rational> {
    let r = Rational::approximate_float(x)
        .ok_or_else(|| Error::Domain(format!("coefficient {x} not representable")))?;
    if to_f64(r) != x {
        return Err(Error::Domain(format!(
            "coefficient {x} is not an exact rational"
        )));
    }
    Ok(r)
}

fn laurent_entries(p: &MatrixSymbol) -> Result<Vec<Vec<Laurent>>> {
    let r = p.block_size();
    let mut m = vec![vec![Laurent::default(); r]; r];
    for (j, b) in p.blocks() {
        for a in 0..r {
            for c in 0..r {
                let v = b[a * r + c];
                let z = CRat::new(exact_rational(v.re)?, exact_rational(v.im)?);
                if !z.is_zero() {
                    *m[a][c].0.entry(j[0]).or_insert_with(CRat::zero) += z;
                }
            }
        }
    }
    Ok(m)
}

pub(crate) fn laurent_det(m: &[Vec<Laurent>]) -> Laurent {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Laurent::default();
    for c in 0..n {
        if m[0][c].0.is_empty() {
            continue;
        }
        let minor: Vec<Vec<Laurent>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != c)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = m[0][c].mul(&laurent_det(&minor));
        acc = acc.add(&term, if c % 2 == 0 { 1 } else { -1 });
    }
    acc
}

fn binomial(n: usize, k: usize) -> i128 {
    (0..k).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
}

/// Taylor coefficients of `z^{-j_min} det p(z)` around `z = −1`, exact.
fn det_taylor_at_minus_one(p: &MatrixSymbol) -> Result<Vec<CRat>> {
    let det = laurent_det(&laurent_entries(p)?);
    let (&jmin, _) = det
        .0
        .iter()
        .next()
        .ok_or_else(|| Error::Domain(format!("det {} vanishes identically", p.name())))?;
    let deg = (det.0.keys().last().unwrap() - jmin) as usize;
    let mut coeffs = vec![CRat::zero(); deg + 1];
    for (&j, c) in &det.0 {
        let e = (j - jmin) as usize;
        for (m, out) in coeffs.iter_mut().enumerate().take(e + 1) {
            let sign = if (e - m) % 2 == 0 { 1 } else { -1 };
            let f = Rational::from_integer(sign * binomial(e, m));
            *out += c * CRat::new(f, Rational::zero());
        }
    }
    Ok(coeffs)
}

/// `|det p(π+ε)|` evaluated stably from the exact expansion at the mirror point.
pub fn det_abs_near_pi(p: &MatrixSymbol, eps: f64) -> Result<f64> {
    check_univariate(p)?;
    let coeffs = det_taylor_at_minus_one(p)?;
    // w = z + 1 with z = e^{i(π+ε)} = −e^{iε}
    let w = c64::new(1.0 - eps.cos(), -eps.sin());
    let w = if eps.abs() < 1e-3 {
        // 1 − cos ε loses digits for small ε
        c64::new(2.0 * (eps / 2.0).sin().powi(2), -eps.sin())
    } else {
        w
    };
    let mut acc = c64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * w + c64::new(to_f64(c.re), to_f64(c.im));
    }
    Ok(acc.norm())
}

/// Order of the zero of `det p` at `θ = π`, read off the log–log slope of
/// `|det p(π+ε)|` for `ε ∈ {1e−2, …, 1e−5}`.
pub fn det_zero_order_at_pi(p: &MatrixSymbol) -> Result<u32> {
    let eps = [1e-2, 1e-3, 1e-4, 1e-5];
    let pts: Vec<(f64, f64)> = eps
        .iter()
        .map(|&e| det_abs_near_pi(p, e).map(|d| (e.ln(), d.ln())))
        .collect::<Result<_>>()?;
    if pts.iter().any(|(_, y)| !y.is_finite()) {
        // det vanishes at the sampled points: order exceeds what the samples resolve
        return Err(Error::AmbiguousOrder {
            slope: f64::INFINITY,
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let slope = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / pts.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
    let order = slope.round();
    if (slope - order).abs() > 0.1 || order < 1.0 {
        return Err(Error::AmbiguousOrder { slope });
    }
    Ok(order as u32)
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub symbol: String,
    pub projector: String,
    pub grid: usize,
    pub condition_b_min: f64,
    pub condition_r_max: f64,
    pub condition_r_max_half_grid: f64,
    /// Row-major real and imaginary parts of `S(0)`.
    pub commutator_re: Vec<Vec<f64>>,
    pub commutator_im: Vec<Vec<f64>>,
    pub commutator_det_abs: f64,
    pub commutator_frobenius: f64,
    pub det_zero_order_at_pi: u32,
}

/// Default exclusion radius around the singular points of `f`.
pub const DEFAULT_DELTA: f64 = 1e-3;

pub fn condition_report(f: &MatrixSymbol, p: &MatrixSymbol, g: usize) -> Result<ConditionReport> {
    let s = commutator(p, 0.0)?;
    let r = s.nrows();
    let fro = (0..r)
        .flat_map(|i| (0..r).map(move |j| (i, j)))
        .map(|(i, j)| s[(i, j)].norm_sqr())
        .sum::<f64>();
    Ok(ConditionReport {
        symbol: f.name().to_string(),
        projector: p.name().to_string(),
        grid: g,
        condition_b_min: condition_b_min(p, g)?,
        condition_r_max: condition_r_max(f, p, g, DEFAULT_DELTA)?,
        condition_r_max_half_grid: condition_r_max(f, p, g / 2, DEFAULT_DELTA)?,
        commutator_re: (0..r)
            .map(|i| (0..r).map(|j| s[(i, j)].re).collect())
            .collect(),
        commutator_im: (0..r)
            .map(|i| (0..r).map(|j| s[(i, j)].im).collect())
            .collect(),
        commutator_det_abs: s.determinant().norm(),
        commutator_frobenius: fro.sqrt(),
        det_zero_order_at_pi: det_zero_order_at_pi(p)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{f_qk_1d, p_q1, p_q2, p_q3};

    #[test]
    fn scalar_condition_b() {
        // (1+cos θ)² + (1−cos θ)² = 2 + 2cos²θ, minimum 2 at θ = π/2
        let v = condition_b_min(&p_q1(), 512).unwrap();
        assert!((v - 2.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn scalar_r_closed_form() {
        // λ_max R(θ) = 1 / (2 + 2cos²θ) for f = 2 − 2cos θ, p = 1 + cos θ
        let f = f_qk_1d(1).unwrap();
        for t in [0.3, 1.0, 2.0, 4.0] {
            let r = r_matrix(&f, &p_q1(), t).unwrap();
            let l = *hermitian_eigenvalues(&r).unwrap().last().unwrap();
            assert!((l - 1.0 / (2.0 + 2.0 * t.cos().powi(2))).abs() < 1e-12);
        }
        let m = condition_r_max(&f, &p_q1(), 512, DEFAULT_DELTA).unwrap();
        assert!((m - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_orders() {
        assert_eq!(det_zero_order_at_pi(&p_q1()).unwrap(), 2);
        assert_eq!(det_zero_order_at_pi(&p_q2()).unwrap(), 3);
        assert_eq!(det_zero_order_at_pi(&p_q3()).unwrap(), 4);
    }

    #[test]
    fn stable_det_agrees_with_direct() {
        for p in [p_q2(), p_q3()] {
            let t = PI + 0.3;
            let direct = p.evaluate(&[t]).determinant().norm();
            assert!((det_abs_near_pi(&p, 0.3).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn printed_commutators() {
        let s2 = commutator(&p_q2(), 0.0).unwrap();
        let e2 = [[-0.5, 0.5], [-0.5, 0.5]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((s2[(i, j)] - c64::new(e2[i][j], 0.0)).norm() < 1e-14);
            }
        }
        let s3 = commutator(&p_q3(), 0.0).unwrap();
        let e3 = [
            [-462.0, 330.0, 132.0],
            [-438.0, 354.0, 84.0],
            [-378.0, 270.0, 108.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((s3[(i, j)] - c64::new(e3[i][j] / 256.0, 0.0)).norm() < 1e-14);
            }
        }
        assert!(s2.determinant().norm() < 1e-12 && s3.determinant().norm() < 1e-12);
    }

    #[test]
    fn scalar_commutator_vanishes() {
        let s = commutator(&p_q1(), 0.7).unwrap();
        assert!(s[(0, 0)].norm() < 1e-15);
    }

    #[test]
    fn block_conditions() {
        for (k, p) in [(2, p_q2()), (3, p_q3())] {
            let f = f_qk_1d(k).unwrap();
            assert!(condition_b_min(&p, 512).unwrap() > 0.0);
            let a = condition_r_max(&f, &p, 256, DEFAULT_DELTA).unwrap();
            let b = condition_r_max(&f, &p, 512, DEFAULT_DELTA).unwrap();
            assert!(
                a.is_finite() && ((a - b) / b).abs() < 0.05,
                "k={k}: {a} {b}"
            );
        }
    }
}
