//! Sorted eigenvalues of a variable-coefficient stiffness matrix against the
//! monotone rearrangement of `a(x)·f(θ)` samples, plus extremal scaling.

use glt_fem::experiments::{distribution_study, extremal_scaling};
use glt_fem::Coefficient;

fn main() -> glt_fem::Result<()> {
    let a = Coefficient::ExpXy;
    for n_sub in [8, 16] {
        let (rows, s) = distribution_study(2, n_sub, &a, None)?;
        println!(
            "N = {:>4}: mean |λ − predicted| = {:.3e}, max = {:.3e}, fraction off by > 5% = {:.3}",
            s.dim, s.mean_abs, s.max_abs, s.outlier_fraction
        );
        let step = rows.len() / 6;
        for r in rows.iter().step_by(step.max(1)) {
            println!(
                "    λ[{:>4}] = {:>9.5}   predicted {:>9.5}",
                r.index, r.eigenvalue, r.predicted
            );
        }
    }

    println!("\nextremal eigenvalues of A_n(1, P2):");
    for r in extremal_scaling(2, &[4, 8, 16])? {
        println!(
            "  N = {:>4}: λ_min = {:.4e}  λ_min·N = {:.4}  λ_max = {:.5}",
            r.dim, r.lambda_min, r.scaled_min, r.lambda_max
        );
    }
    Ok(())
}
