//! Runs the stationary iteration on the layer problem from a zero initial
//! guess and prints the measured error history next to the a-priori envelope
//! rho^k * ||T||-bound, for both sweep orderings.

use schwarz::{
    build_shishkin, iterate, shishkin_rhs_and_exact, IterationOptions, NormKind, SweepOrdering,
    Vector,
};

fn main() -> anyhow::Result<()> {
    for eps in [1e-4, 1e-8] {
        let p = build_shishkin(eps, 0.0, 30, 40)?;
        let (b, _) = shishkin_rhs_and_exact(&p)?;
        let rho12 = schwarz::rho_exact(&p.system, SweepOrdering::T12, NormKind::Inf)?;
        println!("eps = {eps:.0e}: dim = {}, rho12 = {rho12:.3e}", p.dim());
        for ordering in [SweepOrdering::T12, SweepOrdering::T21] {
            let opts = IterationOptions { ordering, ..Default::default() };
            let trace = iterate(&p.system, &b, &Vector::zeros(p.dim()), &opts)?;
            let envelope = p.corollary_error_curve(ordering, trace.error_norms.len() - 1);
            println!("  ordering {ordering}:");
            println!("  {:>3} {:>14} {:>14}", "k", "error", "envelope");
            for (k, (err, env)) in trace.error_norms.iter().zip(&envelope).enumerate() {
                println!("  {k:>3} {err:>14.6e} {env:>14.6e}");
            }
        }
        println!();
    }
    Ok(())
}
