//! Reproduces the convergence-factor table: exact first-ordering factors and
//! the closed-form mesh bound over the default parameter grid.

fn main() -> anyhow::Result<()> {
    let grid = schwarz::default_grid();
    let rows = schwarz::table_rows(&grid)?;
    println!("{}", schwarz::table_csv(&rows).trim_end());

    println!();
    println!("rounded to two significant digits:");
    println!("{:>4} {:>4} {:>8} {:>10} {:>10}", "N", "M", "eps", "rho12", "bound");
    for row in &rows {
        println!(
            "{:>4} {:>4} {:>8.0e} {:>10} {:>10}",
            row.nx,
            row.my,
            row.epsilon,
            schwarz::two_sig(row.rho12_exact_inf),
            schwarz::two_sig(row.rho_bound),
        );
    }
    Ok(())
}
