//! The five-point Poisson model: line-block inverse norms stay below 1/2,
//! and the measured convergence factors sit under both norm bounds.

use schwarz::{build_poisson, rho_exact, NormKind, SweepOrdering};

fn main() -> anyhow::Result<()> {
    println!("{:>3} {:>5} {:>12} {:>12} {:>12} {:>12}", "m", "dim", "||W^-1||", "rho2", "bound2", "rhoInf");
    for m in [1usize, 2, 3, 5, 8, 10] {
        let p = build_poisson(m)?;
        let w_inv = p.system.center().inverse()?.inf_norm();
        let rho_two = rho_exact(&p.system, SweepOrdering::T12, NormKind::Two)?;
        let rho_inf = rho_exact(&p.system, SweepOrdering::T12, NormKind::Inf)?;
        println!(
            "{m:>3} {:>5} {w_inv:>12.6} {rho_two:>12.4e} {:>12.4e} {rho_inf:>12.4e}",
            p.dim(),
            p.two_norm_rho_bound(),
        );
    }
    println!();
    println!("full report for m = 2:");
    println!("{}", schwarz::cmd_poisson(2)?);
    Ok(())
}
