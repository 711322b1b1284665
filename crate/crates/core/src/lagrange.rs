//! Equispaced Lagrange polynomials on `[0, 1]` in exact rational arithmetic,
//! their derivative Gram matrix, and the 1D symbol blocks `K_0`, `K_1`.

use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 8;

/// Dense univariate polynomial, coefficients in ascending degree order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Rational::zero());
        }
        Self { coeffs }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * t + c)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + to_f64(*c))
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(p, c)| c * Rational::from_integer(p as i128))
            .collect();
        Self::new(coeffs)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let at = |v: &[Rational], i: usize| v.get(i).copied().unwrap_or_else(Rational::zero);
        Self::new(
            (0..n)
                .map(|i| at(&self.coeffs, i) + at(&other.coeffs, i))
                .collect(),
        )
    }

    /// Exact value of the integral over `[0, 1]`.
    pub fn integrate_unit(&self) -> Rational {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(p, c)| c / Rational::from_integer(p as i128 + 1))
            .fold(Rational::zero(), |acc, v| acc + v)
    }
}

pub fn to_f64(r: Rational) -> f64 {
    // numerator and denominator fit f64 exactly for every supported degree,
    // so one division rounds to nearest
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

fn check_degree(k: usize) -> Result<()> {
    if (1..=MAX_DEGREE).contains(&k) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "Lagrange degree {k} outside supported range 1..={MAX_DEGREE}"
        )))
    }
}

/// Knot `t_j = j / k`.
pub fn knot(j: usize, k: usize) -> Rational {
    Rational::new(j as i128, k as i128)
}

/// `L_0, ..., L_k` with `L_i(j/k) = δ_ij`.
pub fn lagrange_polynomials(k: usize) -> Result<Vec<Polynomial>> {
    check_degree(k)?;
    let polys = (0..=k)
        .map(|i| {
            (0..=k)
                .filter(|&j| j != i)
                .fold(Polynomial::constant(Rational::one()), |acc, j| {
                    // (t - t_j) / (t_i - t_j)
                    let denom = knot(i, k) - knot(j, k);
                    acc.mul(&Polynomial::new(vec![
                        -knot(j, k) / denom,
                        Rational::one() / denom,
                    ]))
                })
        })
        .collect();
    Ok(polys)
}

/// Exact `(k+1)×(k+1)` Gram matrix of a bilinear form over the Lagrange basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gram {
    k: usize,
    entries: Vec<Rational>,
}

impl Gram {
    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn size(&self) -> usize {
        self.k + 1
    }

    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.entries[i * (self.k + 1) + j]
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.size())
            .map(|i| (0..self.size()).map(|j| to_f64(self.get(i, j))).collect())
            .collect()
    }
}

/// Gram matrix of derivatives, `⟨L_i', L_j'⟩` on `[0, 1]`.
pub type GradGram = Gram;

fn gram_of(polys: &[Polynomial], k: usize) -> Gram {
    let n = k + 1;
    let mut entries = vec![Rational::zero(); n * n];
    for i in 0..n {
        for j in i..n {
            let v = polys[i].mul(&polys[j]).integrate_unit();
            entries[i * n + j] = v;
            entries[j * n + i] = v;
        }
    }
    Gram { k, entries }
}

pub fn grad_inner_products(k: usize) -> Result<GradGram> {
    let derivs: Vec<_> = lagrange_polynomials(k)?
        .iter()
        .map(Polynomial::derivative)
        .collect();
    Ok(gram_of(&derivs, k))
}

/// Mass Gram matrix `⟨L_i, L_j⟩` on `[0, 1]`.
pub fn mass_inner_products(k: usize) -> Result<Gram> {
    Ok(gram_of(&lagrange_polynomials(k)?, k))
}

/// Exact blocks of the 1D symbol `f_k(θ) = K_0 + K_1 e^{iθ} + K_1^T e^{-iθ}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolBlocks1d {
    pub k: usize,
    /// Row-major `k×k`.
    pub k0: Vec<Rational>,
    /// Row-major `k×k`, nonzero only in the last column.
    pub k1: Vec<Rational>,
}

impl SymbolBlocks1d {
    pub fn k0_f64(&self) -> Vec<f64> {
        self.k0.iter().copied().map(to_f64).collect()
    }

    pub fn k1_f64(&self) -> Vec<f64> {
        self.k1.iter().copied().map(to_f64).collect()
    }
}

pub fn build_1d_symbol_blocks(k: usize) -> Result<SymbolBlocks1d> {
    let g = grad_inner_products(k)?;
    let mut k0 = vec![Rational::zero(); k * k];
    let mut k1 = vec![Rational::zero(); k * k];
    for i in 0..k {
        for j in 0..k {
            k0[i * k + j] = g.get(i + 1, j + 1);
        }
        k1[i * k + (k - 1)] = g.get(0, i + 1);
    }
    k0[k * k - 1] += g.get(0, 0);
    Ok(SymbolBlocks1d { k, k0, k1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn linear_basis() {
        let l = lagrange_polynomials(1).unwrap();
        assert_eq!(l[0].coeffs(), &[r(1, 1), r(-1, 1)]);
        assert_eq!(l[1].coeffs(), &[r(0, 1), r(1, 1)]);
    }

    #[test]
    fn kronecker_property_all_degrees() {
        for k in 1..=MAX_DEGREE {
            let l = lagrange_polynomials(k).unwrap();
            for (i, li) in l.iter().enumerate() {
                assert_eq!(li.degree(), k);
                for j in 0..=k {
                    let expect = if i == j {
                        Rational::one()
                    } else {
                        Rational::zero()
                    };
                    assert_eq!(li.eval(knot(j, k)), expect, "k={k} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn partition_of_unity() {
        let l = lagrange_polynomials(3).unwrap();
        for t in [0.1, 0.37, 0.9] {
            let s: f64 = l.iter().map(|p| p.eval_f64(t)).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
        let sum = l.iter().skip(1).fold(l[0].clone(), |acc, p| acc.add(p));
        assert_eq!(sum, Polynomial::constant(Rational::one()));
    }

    #[test]
    fn grad_gram_values() {
        let g1 = grad_inner_products(1).unwrap();
        assert_eq!(g1.get(1, 1), r(1, 1));
        assert_eq!(g1.get(0, 1), r(-1, 1));
        let g2 = grad_inner_products(2).unwrap();
        assert_eq!(g2.get(1, 1), r(16, 3));
        assert_eq!(g2.get(0, 2), r(1, 3));
        assert_eq!(g2.get(2, 2) + g2.get(0, 0), r(14, 3));
    }

    #[test]
    fn grad_gram_rows_sum_to_zero() {
        for k in 1..=MAX_DEGREE {
            let g = grad_inner_products(k).unwrap();
            for i in 0..=k {
                let s = (0..=k).fold(Rational::zero(), |acc, j| acc + g.get(i, j));
                assert!(s.is_zero());
                for j in 0..=k {
                    assert_eq!(g.get(i, j), g.get(j, i));
                }
            }
        }
    }

    #[test]
    fn quadratic_blocks() {
        let b = build_1d_symbol_blocks(2).unwrap();
        assert_eq!(b.k0, vec![r(16, 3), r(-8, 3), r(-8, 3), r(14, 3)]);
        assert_eq!(b.k1, vec![r(0, 1), r(-8, 3), r(0, 1), r(1, 3)]);
    }

    #[test]
    fn degree_out_of_range() {
        assert!(lagrange_polynomials(0).is_err());
        assert!(grad_inner_products(9).is_err());
    }

    #[test]
    fn mass_matrix_linear() {
        let m = mass_inner_products(1).unwrap();
        assert_eq!(m.get(0, 0), r(1, 3));
        assert_eq!(m.get(0, 1), r(1, 6));
    }
}
