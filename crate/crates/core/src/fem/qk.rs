//! Tensor-product `Q_k` elements on uniform meshes of `(0,1)` and `(0,1)²`.

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::lagrange::{lagrange_polynomials, Polynomial};
use crate::quadrature::gauss_legendre;
use crate::sparse::CsrMatrix;

fn check(k: usize, n: usize) -> Result<()> {
    if !(1..=4).contains(&k) {
        return Err(Error::Domain(format!(
            "Q_k elements implemented for k = 1..4; got {k}"
        )));
    }
    if n < 2 {
        return Err(Error::Domain("Q_k mesh needs n_sub ≥ 2".into()));
    }
    Ok(())
}

/// Values and derivatives of the `k+1` Lagrange polynomials at the points.
fn tabulate(k: usize, pts: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let l = lagrange_polynomials(k)?;
    let dl: Vec<Polynomial> = l.iter().map(Polynomial::derivative).collect();
    let val = l
        .iter()
        .map(|p| pts.iter().map(|&x| p.eval_f64(x)).collect())
        .collect();
    let der = dl
        .iter()
        .map(|p| pts.iter().map(|&x| p.eval_f64(x)).collect())
        .collect();
    Ok((val, der))
}

fn positive(a: &Coefficient, x: &[f64]) -> Result<f64> {
    let v = a.eval(x);
    if v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Domain(format!(
            "coefficient {} nonpositive at {x:?}",
            a.name()
        )))
    }
}

/// 1D stiffness over the `nk − 1` internal nodes (unnormalized).
pub fn assemble_qk_1d(k: usize, n: usize, a: &Coefficient) -> Result<CsrMatrix> {
    check(k, n)?;
    let (xq, wq) = gauss_legendre(k + 1);
    let (_, d) = tabulate(k, &xq)?;
    let h = 1.0 / n as f64;
    let dim = n * k - 1;
    let mut trip = Vec::with_capacity(n * (k + 1) * (k + 1));
    for e in 0..n {
        let av: Vec<f64> = xq
            .iter()
            .map(|&t| positive(a, &[(e as f64 + t) * h]))
            .collect::<Result<_>>()?;
        for i in 0..=k {
            for j in 0..=k {
                let (gi, gj) = (e * k + i, e * k + j);
                if gi == 0 || gj == 0 || gi == n * k || gj == n * k {
                    continue;
                }
                let v: f64 = (0..=k)
                    .map(|q| wq[q] * av[q] * d[i][q] * d[j][q])
                    .sum::<f64>()
                    / h;
                trip.push((gi - 1, gj - 1, v));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(dim, dim, &trip))
}

/// 1D mass matrix over the internal nodes.
pub fn mass_qk_1d(k: usize, n: usize) -> Result<CsrMatrix> {
    check(k, n)?;
    let (xq, wq) = gauss_legendre(k + 1);
    let (v, _) = tabulate(k, &xq)?;
    let h = 1.0 / n as f64;
    let dim = n * k - 1;
    let mut trip = Vec::new();
    for e in 0..n {
        for i in 0..=k {
            for j in 0..=k {
                let (gi, gj) = (e * k + i, e * k + j);
                if gi == 0 || gj == 0 || gi == n * k || gj == n * k {
                    continue;
                }
                let m: f64 = (0..=k).map(|q| wq[q] * v[i][q] * v[j][q]).sum::<f64>() * h;
                trip.push((gi - 1, gj - 1, m));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(dim, dim, &trip))
}

/// 2D stiffness over the `(nk − 1)²` internal nodes, x fastest, with
/// `(k+1)²` Gauss–Legendre points per element.
pub fn assemble_qk_2d(k: usize, n: usize, a: &Coefficient) -> Result<CsrMatrix> {
    check(k, n)?;
    let (xq, wq) = gauss_legendre(k + 1);
    let (v, d) = tabulate(k, &xq)?;
    let h = 1.0 / n as f64;
    let m = n * k + 1;
    let inner = m - 2;
    let nq = k + 1;
    let loc = (k + 1) * (k + 1);
    let mut trip = Vec::with_capacity(n * n * loc * loc);
    let mut av = vec![0.0; nq * nq];
    for ey in 0..n {
        for ex in 0..n {
            for qy in 0..nq {
                for qx in 0..nq {
                    let x = [(ex as f64 + xq[qx]) * h, (ey as f64 + xq[qy]) * h];
                    av[qy * nq + qx] = positive(a, &x)?;
                }
            }
            for p in 0..loc {
                let (pi, pj) = (p % (k + 1), p / (k + 1));
                let (gx, gy) = (ex * k + pi, ey * k + pj);
                if gx == 0 || gy == 0 || gx == m - 1 || gy == m - 1 {
                    continue;
                }
                let row = (gy - 1) * inner + gx - 1;
                for q in 0..loc {
                    let (qi, qj) = (q % (k + 1), q / (k + 1));
                    let (hx, hy) = (ex * k + qi, ey * k + qj);
                    if hx == 0 || hy == 0 || hx == m - 1 || hy == m - 1 {
                        continue;
                    }
                    let col = (hy - 1) * inner + hx - 1;
                    let mut s = 0.0;
                    for b in 0..nq {
                        for c in 0..nq {
                            // gradients in reference coordinates; h factors cancel in 2D
                            let gpx = d[pi][c] * v[pj][b];
                            let gpy = v[pi][c] * d[pj][b];
                            let gqx = d[qi][c] * v[qj][b];
                            let gqy = v[qi][c] * d[qj][b];
                            s += wq[b] * wq[c] * av[b * nq + c] * (gpx * gqx + gpy * gqy);
                        }
                    }
                    trip.push((row, col, s));
                }
            }
        }
    }
    Ok(CsrMatrix::from_triplets(
        inner * inner,
        inner * inner,
        &trip,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structured::{cut_principal, BlockToeplitzOperator};
    use crate::symbol::f_qk_1d;

    #[test]
    fn linear_1d_is_tridiagonal() {
        let a = assemble_qk_1d(1, 4, &Coefficient::One).unwrap().scale(0.25);
        assert_eq!(a.nrows(), 3);
        assert!((a.get(0, 0) - 2.0).abs() < 1e-14);
        assert!((a.get(0, 1) + 1.0).abs() < 1e-14);
        assert_eq!(a.get(0, 2), 0.0);
    }

    #[test]
    fn scaled_1d_equals_cut_toeplitz() {
        for k in 1..=4 {
            for n in [4, 8] {
                let a = assemble_qk_1d(k, n, &Coefficient::One)
                    .unwrap()
                    .scale(1.0 / n as f64)
                    .to_dense();
                let t =
                    cut_principal(&BlockToeplitzOperator::new(&f_qk_1d(k).unwrap(), &[n]).unwrap())
                        .unwrap();
                for i in 0..t.nrows() {
                    for j in 0..t.ncols() {
                        assert!((a[(i, j)] - t[(i, j)]).abs() < 1e-12, "k={k} n={n}");
                    }
                }
            }
        }
    }

    #[test]
    fn tensor_identity_2d() {
        for k in 1..=3 {
            let n = 4;
            let a2 = assemble_qk_2d(k, n, &Coefficient::One).unwrap();
            let kk = assemble_qk_1d(k, n, &Coefficient::One).unwrap();
            let mm = mass_qk_1d(k, n).unwrap();
            let t = mm.kron(&kk).add(&kk.kron(&mm));
            assert_eq!(a2.nrows(), t.nrows());
            for (i, j, v) in t.triplets() {
                assert!((a2.get(i, j) - v).abs() < 1e-12, "k={k} ({i},{j})");
            }
            for (i, j, v) in a2.triplets() {
                assert!((t.get(i, j) - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn q2_2d_dimension() {
        assert_eq!(
            assemble_qk_2d(2, 8, &Coefficient::One).unwrap().nrows(),
            225
        );
    }

    #[test]
    fn nonpositive_coefficient_rejected() {
        assert!(assemble_qk_1d(2, 4, &Coefficient::Constant(-1.0)).is_err());
    }
}
