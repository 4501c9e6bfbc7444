//! Block diagonal dominance diagnostics: per-row sums, eta factors, and the
//! resulting convergence-factor bounds, on a sampled system and on the layer
//! discretization.

use schwarz::{
    bounds_report, build_shishkin, random_dominant_system, rho_exact, sample_rng, NormKind,
    SweepOrdering,
};

fn main() -> anyhow::Result<()> {
    let mut rng = sample_rng(schwarz::resolve_seed(None));
    let sampled = random_dominant_system(&mut rng, 3, 4)?;
    let layer = build_shishkin(1e-4, 0.0, 20, 20)?.system;

    for (name, sys) in [("sampled", &sampled), ("layer N=M=20 eps=1e-4", &layer)] {
        let report = bounds_report(sys, NormKind::Inf)?;
        let exact = rho_exact(sys, SweepOrdering::T12, NormKind::Inf)?;
        println!("{name}: n = {}, m = {}", sys.block_dim(), sys.wing_rows());
        println!("{}", serde_json::to_string_pretty(&report)?);
        println!("exact factor {exact:.6e} <= bound {:.6e}", report.rho_bound);
        println!();
    }
    Ok(())
}
