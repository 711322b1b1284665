//! Symbol-level two-grid analysis: the projector conditions, the zero order
//! at the mirror point and the singular commutator at 0.

use glt_fem::experiments::tgm_check;

fn main() -> glt_fem::Result<()> {
    for k in 1..=3 {
        let r = tgm_check(k, 512)?;
        println!("{} with {}:", r.symbol, r.projector);
        println!("  min eig p*p + p(·+π)*p(·+π): {:.6}", r.condition_b_min);
        println!(
            "  max eig R(θ): {:.6} (half grid {:.6})",
            r.condition_r_max, r.condition_r_max_half_grid
        );
        println!(
            "  order of the zero of det p at π: {}",
            r.det_zero_order_at_pi
        );
        println!("  commutator at 0: |det| = {:.1e}", r.commutator_det_abs);
        for row in &r.commutator_re {
            println!(
                "    {}",
                row.iter()
                    .map(|v| format!("{v:>10.6}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
        }
    }
    Ok(())
}
