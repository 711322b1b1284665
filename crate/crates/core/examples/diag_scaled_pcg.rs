//! PCG for `A_n(a, P_k)` preconditioned by `D^{1/2} A_n(1, P_k) D^{1/2}`.
//! Iteration counts stay flat as the mesh is refined.

use glt_fem::experiments::diag_scaled_table;
use glt_fem::Coefficient;

fn main() -> glt_fem::Result<()> {
    for a in [Coefficient::ExpXy, Coefficient::SqrtMix, Coefficient::Jump] {
        for k in [2, 3] {
            let rows = diag_scaled_table(k, &[4, 8, 16, 32], &a, 1e-6, true)?;
            let cols: Vec<String> = rows
                .iter()
                .map(|r| {
                    format!(
                        "N={} → {} ({} ms)",
                        r.n,
                        r.iterations,
                        r.wall_time_ms.unwrap_or(0)
                    )
                })
                .collect();
            println!("{:<10} k={k}: {}", a.name(), cols.join(", "));
        }
    }
    Ok(())
}
