use proptest::prelude::*;

use glt_fem::experiments::{
    random_vector, strang_preconditioner, write_rows, OutputFormat, SolveRow,
};
use glt_fem::fem::{assemble_pk_2d, assemble_qk_1d, assemble_qk_2d};
use glt_fem::solvers::{build_projector, gauss_seidel_sweep, pcg, Preconditioner, SparseCholesky};
use glt_fem::sparse::CsrMatrix;
use glt_fem::structured::{cut_indices, BlockToeplitzOperator};
use glt_fem::{Coefficient, MatrixSymbol};

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

fn energy(a: &CsrMatrix, e: &[f64]) -> f64 {
    a.matvec(e).iter().zip(e).map(|(x, y)| x * y).sum()
}

fn coefficient() -> impl Strategy<Value = Coefficient> {
    prop::sample::select(Coefficient::PRESETS.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn preconditioners_invert_their_action(k in 1usize..=3, n in 2usize..=6, seed in any::<u64>(), a in coefficient()) {
        let av = assemble_pk_2d(k, n, &a).unwrap();
        let a1 = assemble_pk_2d(k, n, &Coefficient::One).unwrap();
        let v = random_vector(av.nrows(), seed);
        let candidates = [
            Preconditioner::ichol0(&av).unwrap(),
            Preconditioner::diag_scaled(&av, &a1).unwrap(),
            Preconditioner::Exact(SparseCholesky::new(&av).unwrap()),
        ];
        for m in &candidates {
            let back = m.apply(&m.apply_inverse(&v).unwrap());
            prop_assert!(rel_diff(&back, &v) < 1e-8, "{}", m.label());
        }
    }

    #[test]
    fn strang_circulant_inverts(k in 1usize..=3, n in 2usize..=8, seed in any::<u64>()) {
        let m = Preconditioner::StrangCirculant(strang_preconditioner(k, n).unwrap());
        let v = random_vector(k * k * n * n, seed);
        let back = m.apply(&m.apply_inverse(&v).unwrap());
        prop_assert!(rel_diff(&back, &v) < 1e-8);
    }

    #[test]
    fn galerkin_coarse_operator_is_coarse_assembly(k in 1usize..=3, half in 2usize..=8) {
        let n = 2 * half;
        let p = build_projector(k, n, 1).unwrap();
        let coarse = assemble_qk_1d(k, n, &Coefficient::One).unwrap().galerkin(&p).to_dense();
        let direct = assemble_qk_1d(k, half, &Coefficient::One).unwrap().to_dense();
        prop_assert_eq!(coarse.nrows(), direct.nrows());
        for i in 0..coarse.nrows() {
            for j in 0..coarse.ncols() {
                prop_assert!((coarse[(i, j)] - direct[(i, j)]).abs() < 1e-9 * n as f64);
            }
        }
    }

    #[test]
    fn galerkin_2d_matches_coarse_assembly(k in 1usize..=2, half in 2usize..=4) {
        let n = 2 * half;
        let p = build_projector(k, n, 2).unwrap();
        let coarse = assemble_qk_2d(k, n, &Coefficient::One).unwrap().galerkin(&p);
        let direct = assemble_qk_2d(k, half, &Coefficient::One).unwrap();
        let diff = coarse.add(&direct.scale(-1.0));
        prop_assert!(diff.triplets().all(|(_, _, v)| v.abs() < 1e-9));
    }

    #[test]
    fn fft_product_matches_sparse(k in 1usize..=3, n1 in 2usize..=5, n2 in 2usize..=5, seed in any::<u64>()) {
        let sym = MatrixSymbol::builtin(&format!("f_P{k}")).unwrap();
        let op = BlockToeplitzOperator::new(&sym, &[n1, n2]).unwrap();
        let x = random_vector(op.dim(), seed);
        let fast = op.apply_real(&x);
        let slow = op.to_csr().unwrap().matvec(&x);
        prop_assert!(rel_diff(&fast, &slow) < 1e-12);
    }

    #[test]
    fn symbols_are_positive_semidefinite(t1 in -3.2f64..3.2, t2 in -3.2f64..3.2) {
        for (name, upper) in [("f_P1", 8.0), ("f_P2", 32.0 / 3.0), ("f_P3", 15.43)] {
            let ev = MatrixSymbol::builtin(name).unwrap().eigenvalues(&[t1, t2]).unwrap();
            prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(ev[0] > -1e-10 && *ev.last().unwrap() < upper, "{name} {ev:?}");
        }
    }

    #[test]
    fn gauss_seidel_reduces_energy_error(k in 1usize..=3, n in 2usize..=6, a in coefficient(), seed in any::<u64>()) {
        let m = assemble_qk_2d(k, n, &a).unwrap();
        let xs = random_vector(m.nrows(), seed);
        let b = m.matvec(&xs);
        let mut x = vec![0.0; m.nrows()];
        let before = energy(&m, &xs);
        gauss_seidel_sweep(&m, &mut x, &b).unwrap();
        let e: Vec<f64> = x.iter().zip(&xs).map(|(a, b)| a - b).collect();
        prop_assert!(energy(&m, &e) < before);
    }

    #[test]
    fn pcg_meets_tolerance(k in 1usize..=3, n in 2usize..=6, a in coefficient(), seed in any::<u64>()) {
        let m = assemble_pk_2d(k, n, &a).unwrap();
        let b = random_vector(m.nrows(), seed);
        let out = pcg(&m, &b, &Preconditioner::ichol0(&m).unwrap(), 1e-8, 10_000).unwrap();
        prop_assert!(out.converged);
        let r: Vec<f64> = m.matvec(&out.x).iter().zip(&b).map(|(x, y)| y - x).collect();
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt() / b.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(rn < 1e-7);
    }

    #[test]
    fn cut_keeps_the_fem_dimension(k in 1usize..=3, n in 2usize..=8) {
        let keep = cut_indices(&[n, n], k * k).unwrap();
        prop_assert_eq!(keep.len(), (n * k - 1).pow(2));
        prop_assert!(keep.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn csv_output_is_deterministic(iters in prop::collection::vec(0usize..500, 1..8), tol in 1e-12f64..1e-1) {
        let rows: Vec<SolveRow> = iters
            .iter()
            .enumerate()
            .map(|(i, &it)| SolveRow {
                experiment: "probe".into(),
                k: 2,
                d: 2,
                n: i,
                method: "identity".into(),
                tol,
                iterations: it,
                converged: true,
                final_residual: tol / 3.0,
                wall_time_ms: None,
            })
            .collect();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        write_rows(&rows, OutputFormat::Csv, &mut a).unwrap();
        write_rows(&rows, OutputFormat::Csv, &mut b).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(String::from_utf8(a).unwrap().lines().count(), rows.len() + 1);
    }
}
