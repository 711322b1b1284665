//! Eigenvalue surfaces of the `P_k` stiffness symbols: extrema over a periodic
//! grid and the spectrum at one frequency.

use glt_fem::experiments::surface_extrema_table;
use glt_fem::MatrixSymbol;

fn main() -> glt_fem::Result<()> {
    let f = MatrixSymbol::builtin("f_P2")?;
    println!(
        "f_P2(π/3, π/2) eigenvalues: {:.6?}",
        f.eigenvalues(&[std::f64::consts::FRAC_PI_3, std::f64::consts::FRAC_PI_2])?
    );

    for k in 1..=3 {
        println!("\nk = {k}");
        for row in surface_extrema_table(k, 256)? {
            println!(
                "  surface {}: min {:>10.6}  max {:>10.6}",
                row.surface, row.min, row.max
            );
        }
    }
    Ok(())
}
