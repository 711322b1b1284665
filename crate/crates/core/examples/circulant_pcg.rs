//! PCG on `T_n(f_P2)` and on its Dirichlet embedding with identity, IC(0)
//! and Strang circulant preconditioners, and the weak cluster at 1.

use glt_fem::experiments::{circulant_table, weak_cluster_table, DEFAULT_SEED};

fn main() -> glt_fem::Result<()> {
    println!(
        "{:<20} {:>6} {:>10} {:>6}",
        "matrix", "N", "precond", "iters"
    );
    for r in circulant_table(2, &[4, 8, 16, 32], 1e-6, DEFAULT_SEED, false)? {
        println!(
            "{:<20} {:>6} {:>10} {:>6}",
            r.experiment, r.n, r.method, r.iterations
        );
    }

    println!("\neigenvalues of C⁻¹A outside (0.9, 1.1):");
    for r in weak_cluster_table(2, &[4, 8, 16], 0.1)? {
        println!(
            "  {:<8} N = {:>5}: {:>4} ({:.3})",
            r.matrix, r.n, r.outliers, r.fraction
        );
    }
    Ok(())
}
