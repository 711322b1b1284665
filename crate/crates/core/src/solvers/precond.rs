use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::structured::BlockCirculantMatrix;

/// Sparse Cholesky factorization with the original matrix kept for `apply`.
#[derive(Clone, Debug)]
pub struct SparseCholesky {
    a: CsrMatrix,
    llt: Llt<usize, f64>,
}

impl SparseCholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let llt = a
            .to_faer()?
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Factorization(format!("sparse Cholesky: {e:?}")))?;
        Ok(Self { a: a.clone(), llt })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        self.llt.solve_in_place(&mut rhs);
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.a
    }
}

/// Zero-fill incomplete Cholesky `A ≈ L Lᵀ` with `L` on the lower pattern of `A`.
#[derive(Clone, Debug)]
pub struct IncompleteCholesky {
    /// Rows of `L`, columns ascending, diagonal last.
    l: CsrMatrix,
    shift: f64,
}

const ICHOL_RETRIES: usize = 3;

impl IncompleteCholesky {
    /// On a nonpositive pivot the factorization is retried on `A + tσI` for
    /// `t = 1, 2, 3` with `σ = 10⁻³ · mean(diag A)`.
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let diag = a.diagonal();
        if diag.iter().any(|&d| d <= 0.0) {
            return Err(Error::Factorization(
                "IC(0) needs a positive diagonal".into(),
            ));
        }
        let sigma = 1e-3 * diag.iter().sum::<f64>() / diag.len().max(1) as f64;
        for t in 0..=ICHOL_RETRIES {
            let shift = t as f64 * sigma;
            if let Some(l) = Self::factor(a, shift) {
                return Ok(Self { l, shift });
            }
        }
        Err(Error::Factorization(format!(
            "IC(0) hit a nonpositive pivot after {ICHOL_RETRIES} diagonal shifts"
        )))
    }

    fn factor(a: &CsrMatrix, shift: f64) -> Option<CsrMatrix> {
        let n = a.nrows();
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
        let mut trip = Vec::new();
        for i in 0..n {
            let mut row: Vec<(usize, f64)> = Vec::new();
            for (j, aij) in a.row(i).filter(|&(j, _)| j < i) {
                let s = sparse_dot(&row, &rows[j]);
                let ljj = rows[j].last().unwrap().1;
                row.push((j, (aij - s) / ljj));
            }
            let d = a.get(i, i) + shift - row.iter().map(|(_, v)| v * v).sum::<f64>();
            if !(d > 0.0) {
                return None;
            }
            row.push((i, d.sqrt()));
            trip.extend(row.iter().map(|&(j, v)| (i, j, v)));
            rows.push(row);
        }
        Some(CsrMatrix::from_triplets(n, n, &trip))
    }

    /// Diagonal shift that was needed, zero when the plain factorization succeeded.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn factor_matrix(&self) -> &CsrMatrix {
        &self.l
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            let mut d = 1.0;
            for (j, v) in self.l.row(i) {
                if j < i {
                    s -= v * y[j];
                } else {
                    d = v;
                }
            }
            y[i] = s / d;
        }
        for i in (0..n).rev() {
            let d = self.l.get(i, i);
            y[i] /= d;
            let xi = y[i];
            for (j, v) in self.l.row(i).filter(|&(j, _)| j < i) {
                y[j] -= v * xi;
            }
        }
        y
    }

    /// `L Lᵀ x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let lt = self.l.transpose();
        self.l.matvec(&lt.matvec(x))
    }
}

/// Dot product of two sparse rows restricted to columns below the current pivot.
fn sparse_dot(a: &[(usize, f64)], b: &[(usize, f64)]) -> f64 {
    let (mut p, mut q, mut s) = (0, 0, 0.0);
    while p < a.len() && q < b.len() {
        match a[p].0.cmp(&b[q].0) {
            std::cmp::Ordering::Less => p += 1,
            std::cmp::Ordering::Greater => q += 1,
            std::cmp::Ordering::Equal => {
                s += a[p].1 * b[q].1;
                p += 1;
                q += 1;
            }
        }
    }
    s
}

/// `P(a) = D̃^{1/2} A(1) D̃^{1/2}` with `D̃ = diag(A(a)) / diag(A(1))`.
#[derive(Clone, Debug)]
pub struct DiagScaled {
    sqrt_scale: Vec<f64>,
    inner: SparseCholesky,
}

impl DiagScaled {
    pub fn new(a_var: &CsrMatrix, a_one: &CsrMatrix) -> Result<Self> {
        if a_var.nrows() != a_one.nrows() {
            return Err(Error::Domain(
                "diagonal scaling needs matrices of equal size".into(),
            ));
        }
        let sqrt_scale = a_var
            .diagonal()
            .iter()
            .zip(a_one.diagonal())
            .map(|(&da, d1)| {
                if da > 0.0 && d1 > 0.0 {
                    Ok((da / d1).sqrt())
                } else {
                    Err(Error::Domain(
                        "diagonal scaling needs positive diagonals".into(),
                    ))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sqrt_scale,
            inner: SparseCholesky::new(a_one)?,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = b.iter().zip(&self.sqrt_scale).map(|(v, s)| v / s).collect();
        let mut x = self.inner.solve(&scaled);
        x.iter_mut()
            .zip(&self.sqrt_scale)
            .for_each(|(v, s)| *v /= s);
        x
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = x.iter().zip(&self.sqrt_scale).map(|(v, s)| v * s).collect();
        let mut y = self.inner.matrix().matvec(&scaled);
        y.iter_mut()
            .zip(&self.sqrt_scale)
            .for_each(|(v, s)| *v *= s);
        y
    }
}

#[derive(Clone, Debug)]
pub enum Preconditioner {
    Identity,
    IncompleteCholesky0(IncompleteCholesky),
    StrangCirculant(BlockCirculantMatrix),
    DiagScaledConstantCoeff(DiagScaled),
    Exact(SparseCholesky),
}

impl Preconditioner {
    pub fn ichol0(a: &CsrMatrix) -> Result<Self> {
        IncompleteCholesky::new(a).map(Self::IncompleteCholesky0)
    }

    pub fn diag_scaled(a_var: &CsrMatrix, a_one: &CsrMatrix) -> Result<Self> {
        DiagScaled::new(a_var, a_one).map(Self::DiagScaledConstantCoeff)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Identity => "identity",
            Self::IncompleteCholesky0(_) => "ichol0",
            Self::StrangCirculant(_) => "strang",
            Self::DiagScaledConstantCoeff(_) => "diag-scaled",
            Self::Exact(_) => "exact",
        }
    }

    /// `M⁻¹ v`.
    pub fn apply_inverse(&self, v: &[f64]) -> Result<Vec<f64>> {
        Ok(match self {
            Self::Identity => v.to_vec(),
            Self::IncompleteCholesky0(ic) => ic.solve(v),
            Self::StrangCirculant(c) => c.solve_real(v)?,
            Self::DiagScaledConstantCoeff(d) => d.solve(v),
            Self::Exact(ch) => ch.solve(v),
        })
    }

    /// `M v`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Self::Identity => v.to_vec(),
            Self::IncompleteCholesky0(ic) => ic.apply(v),
            Self::StrangCirculant(c) => {
                let z: Vec<faer::c64> = v.iter().map(|&x| faer::c64::new(x, 0.0)).collect();
                c.apply(&z).iter().map(|z| z.re).collect()
            }
            Self::DiagScaledConstantCoeff(d) => d.apply(v),
            Self::Exact(ch) => ch.matrix().matvec(v),
        }
    }
}
