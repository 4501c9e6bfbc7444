//! Round-trips a system through the JSON interchange format and solves it
//! the same way `schwarz custom --system ... --rhs ...` does.

use schwarz::{
    random_dominant_system, random_rhs, rhs_to_json, sample_rng, system_from_json, system_to_json,
};

fn main() -> anyhow::Result<()> {
    let mut rng = sample_rng(schwarz::resolve_seed(None));
    let sys = random_dominant_system(&mut rng, 2, 3)?;
    let b = random_rhs(&mut rng, sys.dim());

    let dir = std::env::temp_dir();
    let sys_path = dir.join("schwarz_example_system.json");
    let rhs_path = dir.join("schwarz_example_rhs.json");
    std::fs::write(&sys_path, system_to_json(&sys))?;
    std::fs::write(&rhs_path, rhs_to_json(&b))?;
    println!("wrote {} and {}", sys_path.display(), rhs_path.display());

    let text = std::fs::read_to_string(&sys_path)?;
    let restored = system_from_json(&text)?;
    let drift = sys
        .materialize_dense()?
        .sub(&restored.materialize_dense()?)
        .inf_norm();
    println!("round-trip drift: {drift:.1e}");

    let report = schwarz::cmd_custom(&text, &std::fs::read_to_string(&rhs_path)?)?;
    println!("{report}");
    Ok(())
}
