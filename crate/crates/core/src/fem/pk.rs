//! `P_k` triangles on Friedrichs–Keller meshes of the unit square.
//!
//! Every square cell is split by the diagonal from `(1,0)` to `(0,1)` into a
//! type-1 triangle (right angle at its first vertex) and a type-2 triangle
//! (right angle at its second vertex). Local nodes follow the reference
//! ordering: vertices, then edge `v2→v3`, edge `v3→v1`, edge `v1→v2`, each at
//! `i/k`, then interior nodes.

use std::collections::BTreeMap;

use faer::c64;
use num_traits::{One, Signed, Zero};

use crate::coefficient::Coefficient;
use crate::error::{Error, Result};
use crate::lagrange::{to_f64, Rational};
use crate::sparse::CsrMatrix;
use crate::symbol::MatrixSymbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriangleType {
    /// Vertices `(0,0), (1,0), (0,1)`.
    Lower = 1,
    /// Vertices `(1,0), (1,1), (0,1)`.
    Upper = 2,
}

impl TriangleType {
    fn vertices(self) -> [[i64; 2]; 3] {
        match self {
            Self::Lower => [[0, 0], [1, 0], [0, 1]],
            Self::Upper => [[1, 0], [1, 1], [0, 1]],
        }
    }
}

fn check_k(k: usize) -> Result<()> {
    if (1..=3).contains(&k) {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "P_k elements implemented for k = 1, 2, 3; got {k}"
        )))
    }
}

/// Reference nodes scaled by `k` (integer lattice coordinates).
pub fn reference_nodes(k: usize) -> Vec<[i64; 2]> {
    let k = k as i64;
    let v = [[0, 0], [k, 0], [0, k]];
    let mut pts = v.to_vec();
    let edge = |p: [i64; 2], q: [i64; 2]| {
        (1..k).map(move |i| [p[0] + (q[0] - p[0]) * i / k, p[1] + (q[1] - p[1]) * i / k])
    };
    pts.extend(edge(v[1], v[2]));
    pts.extend(edge(v[2], v[0]));
    pts.extend(edge(v[0], v[1]));
    for j in 1..k {
        for i in 1..(k - j) {
            pts.push([i, j]);
        }
    }
    pts
}

/// Bivariate polynomial as a map from exponent pair to coefficient.
type Poly2 = BTreeMap<(u32, u32), Rational>;

fn factorial(n: u32) -> i128 {
    (1..=n as i128).product()
}

/// `∫_T x^a y^b` over the reference triangle.
fn monomial_integral(a: u32, b: u32) -> Rational {
    Rational::new(factorial(a) * factorial(b), factorial(a + b + 2))
}

fn diff(p: &Poly2, wrt_x: bool) -> Poly2 {
    let mut out = Poly2::new();
    for (&(a, b), c) in p {
        let (e, na, nb) = if wrt_x {
            (a, a.wrapping_sub(1), b)
        } else {
            (b, a, b.wrapping_sub(1))
        };
        if e > 0 {
            *out.entry((na, nb)).or_insert_with(Rational::zero) +=
                c * Rational::from_integer(e as i128);
        }
    }
    out
}

fn integral_of_product(p: &Poly2, q: &Poly2) -> Rational {
    let mut s = Rational::zero();
    for (&(a1, b1), c1) in p {
        for (&(a2, b2), c2) in q {
            s += c1 * c2 * monomial_integral(a1 + a2, b1 + b2);
        }
    }
    s
}

/// Nodal basis on the reference triangle, exact.
fn reference_basis(k: usize) -> Vec<Poly2> {
    let nodes = reference_nodes(k);
    let monos: Vec<(u32, u32)> = (0..=k as u32)
        .flat_map(|a| (0..=(k as u32 - a)).map(move |b| (a, b)))
        .collect();
    let n = nodes.len();
    let kk = Rational::from_integer(k as i128);
    let pow = |x: Rational, e: u32| (0..e).fold(Rational::one(), |acc, _| acc * x);
    // V[i][m] = mono_m(node_i); basis coefficients solve V C = I
    let mut aug: Vec<Vec<Rational>> = nodes
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let (x, y) = (
                Rational::from_integer(p[0] as i128) / kk,
                Rational::from_integer(p[1] as i128) / kk,
            );
            let mut row: Vec<Rational> =
                monos.iter().map(|&(a, b)| pow(x, a) * pow(y, b)).collect();
            row.extend((0..n).map(|j| {
                if i == j {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }));
            row
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .find(|&r| !aug[r][col].is_zero())
            .expect("unisolvent node set");
        aug.swap(col, piv);
        let inv = Rational::one() / aug[col][col];
        aug[col].iter_mut().for_each(|v| *v *= inv);
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col];
                let pivot_row = aug[col].clone();
                aug[r]
                    .iter_mut()
                    .zip(&pivot_row)
                    .for_each(|(v, p)| *v -= f * p);
            }
        }
    }
    (0..n)
        .map(|i| {
            monos
                .iter()
                .enumerate()
                .filter(|(m, _)| !aug[*m][n + i].is_zero())
                .map(|(m, &e)| (e, aug[m][n + i]))
                .collect()
        })
        .collect()
}

/// Exact elemental stiffness matrix for `a ≡ 1` on a triangle of the given
/// type with unit legs (the 2D stiffness is invariant under scaling).
pub fn elemental_matrix_exact(k: usize, ty: TriangleType) -> Result<Vec<Vec<Rational>>> {
    check_k(k)?;
    let basis = reference_basis(k);
    let grads: Vec<[Poly2; 2]> = basis
        .iter()
        .map(|p| [diff(p, true), diff(p, false)])
        .collect();
    let v = ty.vertices();
    let j = [
        [v[1][0] - v[0][0], v[2][0] - v[0][0]],
        [v[1][1] - v[0][1], v[2][1] - v[0][1]],
    ];
    let det = Rational::from_integer((j[0][0] * j[1][1] - j[0][1] * j[1][0]) as i128);
    let r = |x: i64| Rational::from_integer(x as i128);
    // J^{-1}
    let ji = [
        [r(j[1][1]) / det, r(-j[0][1]) / det],
        [r(-j[1][0]) / det, r(j[0][0]) / det],
    ];
    // G = |det J| J^{-1} J^{-T}
    let g: Vec<Vec<Rational>> = (0..2)
        .map(|a| {
            (0..2)
                .map(|b| det.abs() * (ji[a][0] * ji[b][0] + ji[a][1] * ji[b][1]))
                .collect()
        })
        .collect();
    let n = basis.len();
    Ok((0..n)
        .map(|p| {
            (0..n)
                .map(|q| {
                    let mut s = Rational::zero();
                    for a in 0..2 {
                        for b in 0..2 {
                            if !g[a][b].is_zero() {
                                s += g[a][b] * integral_of_product(&grads[p][a], &grads[q][b]);
                            }
                        }
                    }
                    s
                })
                .collect()
        })
        .collect())
}

pub fn elemental_matrix_pk(k: usize, ty: TriangleType) -> Result<Vec<Vec<f64>>> {
    Ok(elemental_matrix_exact(k, ty)?
        .into_iter()
        .map(|row| row.into_iter().map(to_f64).collect())
        .collect())
}

/// Local nodes of a triangle in lattice units of `h/k`, relative to the cell origin.
fn physical_nodes(k: usize, ty: TriangleType) -> Vec<[i64; 2]> {
    let v = ty.vertices();
    let j = [
        [v[1][0] - v[0][0], v[2][0] - v[0][0]],
        [v[1][1] - v[0][1], v[2][1] - v[0][1]],
    ];
    let k = k as i64;
    reference_nodes(k as usize)
        .into_iter()
        .map(|[x, y]| {
            [
                v[0][0] * k + j[0][0] * x + j[0][1] * y,
                v[0][1] * k + j[1][0] * x + j[1][1] * y,
            ]
        })
        .collect()
}

fn barycenter(ty: TriangleType) -> [f64; 2] {
    let v = ty.vertices();
    [
        (v[0][0] + v[1][0] + v[2][0]) as f64 / 3.0,
        (v[0][1] + v[1][1] + v[2][1]) as f64 / 3.0,
    ]
}

/// Full stiffness including boundary nodes, as triplets over the
/// `(nk+1)²` lattice (x fastest).
fn assemble_full(k: usize, n: usize, a: &Coefficient) -> Result<Vec<(usize, usize, f64)>> {
    check_k(k)?;
    let m = n * k + 1;
    let types = [TriangleType::Lower, TriangleType::Upper];
    let elems: Vec<Vec<Vec<f64>>> = types
        .iter()
        .map(|&t| elemental_matrix_pk(k, t))
        .collect::<Result<_>>()?;
    let nodes: Vec<Vec<[i64; 2]>> = types.iter().map(|&t| physical_nodes(k, t)).collect();
    let mut trip = Vec::with_capacity(2 * n * n * elems[0].len().pow(2));
    for cy in 0..n {
        for cx in 0..n {
            for (t, ty) in types.iter().enumerate() {
                let bc = barycenter(*ty);
                let x = [
                    (cx as f64 + bc[0]) / n as f64,
                    (cy as f64 + bc[1]) / n as f64,
                ];
                let av = a.eval(&x);
                if !(av > 0.0) {
                    return Err(Error::Domain(format!(
                        "coefficient {} nonpositive at {x:?}",
                        a.name()
                    )));
                }
                let ids: Vec<usize> = nodes[t]
                    .iter()
                    .map(|p| (cy * k + p[1] as usize) * m + cx * k + p[0] as usize)
                    .collect();
                for (p, &gi) in ids.iter().enumerate() {
                    for (q, &gj) in ids.iter().enumerate() {
                        let v = elems[t][p][q];
                        if v != 0.0 {
                            trip.push((gi, gj, av * v));
                        }
                    }
                }
            }
        }
    }
    Ok(trip)
}

/// Stiffness matrix over internal nodes, lexicographic order with x fastest.
pub fn assemble_pk_2d(k: usize, n: usize, a: &Coefficient) -> Result<CsrMatrix> {
    if n < 2 {
        return Err(Error::Domain("P_k mesh needs n_sub ≥ 2".into()));
    }
    let m = n * k + 1;
    let inner = m - 2;
    let map = |g: usize| {
        let (gx, gy) = (g % m, g / m);
        (gx >= 1 && gx < m - 1 && gy >= 1 && gy < m - 1).then(|| (gy - 1) * inner + gx - 1)
    };
    let trip: Vec<_> = assemble_full(k, n, a)?
        .into_iter()
        .filter_map(|(i, j, v)| Some((map(i)?, map(j)?, v)))
        .collect();
    Ok(CsrMatrix::from_triplets(
        inner * inner,
        inner * inner,
        &trip,
    ))
}

/// Maps lexicographic internal-node order to the order of the cut
/// `T_n(f_{P_k})`: `perm[mesh_index] = toeplitz_index`.
///
/// Nodes are grouped per cell, `k²` at a time, local index `l_y·k + l_x`.
/// For `k = 1` no grouping is needed and the identity is returned (`f_P1` is
/// symmetric in its two variables).
pub fn pk_grouping_permutation(k: usize, n: usize) -> Result<Vec<usize>> {
    check_k(k)?;
    let inner = n * k - 1;
    if k == 1 {
        return Ok((0..inner * inner).collect());
    }
    let r = k * k;
    let kept = crate::structured::cut_indices(&[n, n], r)?;
    let mut pos = vec![usize::MAX; n * n * r];
    for (p, &full) in kept.iter().enumerate() {
        pos[full] = p;
    }
    let perm = (0..inner * inner)
        .map(|idx| {
            let (gx, gy) = (idx % inner, idx / inner);
            let (cx, lx, cy, ly) = (gx / k, gx % k, gy / k, gy % k);
            pos[(cx * n + cy) * r + ly * k + lx]
        })
        .collect();
    Ok(perm)
}

/// Symbol of `A_n(1, Ω, P_k)` read off the assembled matrix with the grouping
/// of [`pk_grouping_permutation`]. Independent of the printed symbols.
pub fn pk_symbol_from_assembly(k: usize) -> Result<MatrixSymbol> {
    let n = 5;
    let m = n * k + 1;
    let full = CsrMatrix::from_triplets(m * m, m * m, &assemble_full(k, n, &Coefficient::One)?);
    let node = |cx: usize, cy: usize, lx: usize, ly: usize| (k * cy + ly + 1) * m + k * cx + lx + 1;
    let r = k * k;
    let c0 = 2usize;
    let mut blocks: BTreeMap<Vec<i32>, Vec<c64>> = BTreeMap::new();
    for dy in -1i32..=1 {
        for dx in -1i32..=1 {
            let mut b = vec![c64::new(0.0, 0.0); r * r];
            for l in 0..r {
                for q in 0..r {
                    let row = node(c0, c0, l % k, l / k);
                    let col = node(
                        (c0 as i32 + dx) as usize,
                        (c0 as i32 + dy) as usize,
                        q % k,
                        q / k,
                    );
                    b[l * r + q] = c64::new(full.get(row, col), 0.0);
                }
            }
            if b.iter().any(|v| v.re != 0.0) {
                blocks.insert(vec![-dx, -dy], b);
            }
        }
    }
    MatrixSymbol::from_blocks(format!("f_P{k}_assembled"), 2, r, blocks, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structured::{cut_principal, BlockToeplitzOperator};
    use crate::symbol::{f_p1, f_p2, f_p3};

    fn q(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn linear_elements() {
        let a1 = elemental_matrix_exact(1, TriangleType::Lower).unwrap();
        let h = q(1, 2);
        assert_eq!(
            a1,
            vec![
                vec![h * 2, -h, -h],
                vec![-h, h, q(0, 1)],
                vec![-h, q(0, 1), h]
            ]
        );
        let a2 = elemental_matrix_exact(1, TriangleType::Upper).unwrap();
        assert_eq!(
            a2,
            vec![
                vec![h, -h, q(0, 1)],
                vec![-h, h * 2, -h],
                vec![q(0, 1), -h, h]
            ]
        );
    }

    #[test]
    fn quadratic_element_entry() {
        let a = elemental_matrix_exact(2, TriangleType::Lower).unwrap();
        assert_eq!(a[3][3], q(8, 3));
        assert_eq!(a[0][1], q(1, 6));
    }

    #[test]
    fn cubic_element_entry() {
        let a = elemental_matrix_exact(3, TriangleType::Lower).unwrap();
        assert_eq!(a[9][9], q(81, 10));
    }

    #[test]
    fn rows_sum_to_zero() {
        for k in 1..=3 {
            for ty in [TriangleType::Lower, TriangleType::Upper] {
                for row in elemental_matrix_exact(k, ty).unwrap() {
                    assert!(row.iter().fold(Rational::zero(), |a, b| a + b).is_zero());
                }
            }
        }
    }

    #[test]
    fn p1_assembly_is_five_point_stencil() {
        let a = assemble_pk_2d(1, 4, &Coefficient::One).unwrap();
        assert_eq!(a.nrows(), 9);
        for i in 0..9 {
            assert_eq!(a.get(i, i), 4.0);
        }
        assert_eq!(a.get(0, 1), -1.0);
        assert_eq!(a.get(0, 3), -1.0);
        assert_eq!(a.get(0, 4), 0.0);
    }

    fn max_diff_permuted(k: usize, n: usize, sym: &MatrixSymbol) -> f64 {
        let a = assemble_pk_2d(k, n, &Coefficient::One).unwrap();
        let perm = pk_grouping_permutation(k, n).unwrap();
        let ap = a.permute_symmetric(&perm).to_dense();
        let t = cut_principal(&BlockToeplitzOperator::new(sym, &[n, n]).unwrap()).unwrap();
        assert_eq!(t.nrows(), ap.nrows());
        let mut m: f64 = 0.0;
        for i in 0..t.nrows() {
            for j in 0..t.ncols() {
                m = m.max((t[(i, j)] - ap[(i, j)]).abs());
            }
        }
        m
    }

    #[test]
    fn permuted_cut_equals_assembly() {
        assert!(max_diff_permuted(1, 4, &f_p1()) < 1e-12);
        assert!(max_diff_permuted(2, 2, &f_p2()) < 1e-12);
        assert!(max_diff_permuted(2, 4, &f_p2()) < 1e-12);
        assert!(max_diff_permuted(3, 2, &f_p3()) < 1e-12);
        assert!(max_diff_permuted(3, 3, &f_p3()) < 1e-12);
    }

    #[test]
    fn assembled_symbol_matches_printed() {
        for (k, printed) in [(1, f_p1()), (2, f_p2()), (3, f_p3())] {
            let derived = pk_symbol_from_assembly(k).unwrap();
            for theta in [[0.3, -1.1], [2.0, 0.7], [-3.0, 3.1]] {
                let a = derived.evaluate(&theta);
                let b = printed.evaluate(&theta);
                for p in 0..k * k {
                    for q in 0..k * k {
                        assert!((a[(p, q)] - b[(p, q)]).norm() < 1e-12, "k={k} ({p},{q})");
                    }
                }
            }
        }
    }

    #[test]
    fn permutation_is_bijection() {
        for (k, n) in [(2, 2), (3, 2), (2, 5)] {
            let mut p = pk_grouping_permutation(k, n).unwrap();
            assert_eq!(p.len(), (n * k - 1).pow(2));
            p.sort_unstable();
            assert!(p.iter().enumerate().all(|(i, &v)| i == v));
        }
    }
}
