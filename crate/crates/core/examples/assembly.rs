//! Assembles Lagrangian stiffness matrices and checks them against the
//! Toeplitz matrix generated by the symbol.

use glt_fem::fem::{assemble_pk_2d, elemental_matrix_exact, pk_grouping_permutation, TriangleType};
use glt_fem::structured::{cut_principal, BlockToeplitzOperator};
use glt_fem::{Coefficient, MatrixSymbol};

fn main() -> glt_fem::Result<()> {
    println!("P2 elemental matrix, lower triangle:");
    for row in elemental_matrix_exact(2, TriangleType::Lower)? {
        println!(
            "  {}",
            row.iter()
                .map(|v| format!("{v:>5}"))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }

    let (k, n) = (2, 4);
    let a = assemble_pk_2d(k, n, &Coefficient::One)?;
    println!(
        "\nA_n(1, P2) with n_sub = {n}: {} unknowns, {} nonzeros",
        a.nrows(),
        a.nnz()
    );

    let grouped = a
        .permute_symmetric(&pk_grouping_permutation(k, n)?)
        .to_dense();
    let t = cut_principal(&BlockToeplitzOperator::new(
        &MatrixSymbol::builtin("f_P2")?,
        &[n, n],
    )?)?;
    let mut dev: f64 = 0.0;
    for i in 0..t.nrows() {
        for j in 0..t.ncols() {
            dev = dev.max((t[(i, j)] - grouped[(i, j)]).abs());
        }
    }
    println!("max |P A Pᵀ − cut T_n(f_P2)| = {dev:.2e}");

    let var = assemble_pk_2d(k, n, &"exp_xy".parse()?)?;
    let mut mm = Vec::new();
    var.write_matrix_market(&mut mm)?;
    let text = String::from_utf8_lossy(&mm);
    println!("\nA_n(e^(x+y), P2) in Matrix Market form, first lines:");
    text.lines().take(4).for_each(|l| println!("  {l}"));
    Ok(())
}
