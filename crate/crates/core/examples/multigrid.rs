//! Geometric two-grid and V-cycle solvers for `Q_k` with the Lagrange
//! interpolation prolongation.

use glt_fem::experiments::multigrid_table;
use glt_fem::fem::assemble_qk_1d;
use glt_fem::solvers::{
    build_hierarchy, build_projector_1d_exact, tgm_spectral_radius, DEFAULT_COARSEST,
};
use glt_fem::Coefficient;

fn main() -> glt_fem::Result<()> {
    println!("Q2 prolongation for 8 → 4 subintervals, first column:");
    for (i, j, v) in build_projector_1d_exact(2, 8)?
        .into_iter()
        .filter(|e| e.1 == 0)
    {
        println!("  P[{i}, {j}] = {v}");
    }

    let a = assemble_qk_1d(2, 32, &Coefficient::One)?;
    let h = build_hierarchy(&a, 2, 1, 32, DEFAULT_COARSEST)?;
    println!("\nlevel dimensions: {:?}", h.level_dims());
    println!("two-grid spectral radius: {:.4}", tgm_spectral_radius(&h)?);

    for (d, subs) in [(1, vec![8, 32, 128, 512]), (2, vec![8, 16, 32, 64])] {
        for k in 1..=3 {
            let rows = multigrid_table(k, d, &subs, &Coefficient::One, 1e-6, false)?;
            let cols: Vec<String> = rows
                .chunks(2)
                .map(|c| format!("{}:{}/{}", c[0].n, c[0].iterations, c[1].iterations))
                .collect();
            println!("d={d} k={k} (N: two-grid/V-cycle) {}", cols.join("  "));
        }
    }

    let rows = multigrid_table(2, 2, &[8, 16, 32], &Coefficient::Jump5000, 1e-6, false)?;
    let cols: Vec<String> = rows
        .chunks(2)
        .map(|c| format!("{}:{}/{}", c[0].n, c[0].iterations, c[1].iterations))
        .collect();
    println!("d=2 k=2 jump 1/5000: {}", cols.join("  "));
    Ok(())
}
