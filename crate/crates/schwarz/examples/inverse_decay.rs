//! Off-diagonal decay of block-tridiagonal inverses under column dominance:
//! the profile's tau/omega factors bound every block of the inverse relative
//! to its diagonal, and the diagonal norms sit inside the printed brackets.

use schwarz::{decay_profile, random_dominant_system, sample_rng, NormKind};

fn main() -> anyhow::Result<()> {
    let mut rng = sample_rng(schwarz::resolve_seed(None));
    let sys = random_dominant_system(&mut rng, 3, 6)?;
    let wing = sys.wing_top();
    let profile = decay_profile(wing, NormKind::Inf)?;
    let m = wing.block_rows();
    let n = wing.block_dim();
    let inverse = wing.materialize().inverse()?;

    println!("wing: {m} block rows of size {n}");
    println!("tau   = {:?}", profile.tau_tilde.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>());
    println!("omega = {:?}", profile.omega_tilde.iter().map(|x| (x * 1e4).round() / 1e4).collect::<Vec<_>>());
    println!();
    println!("{:>3} {:>12} {:>12} {:>12}", "i", "lower", "||Z_ii||", "upper");
    for i in 0..m {
        let zii = inverse.block(i * n, i * n, n, n).inf_norm();
        let upper = profile.diag_upper[i].map_or("-".to_string(), |u| format!("{u:.6e}"));
        println!("{i:>3} {:>12.6e} {zii:>12.6e} {:>12}", profile.diag_lower[i], upper);
    }
    println!();
    println!("actual ||Z_ij|| over bound ||Z_ii|| * factor(i,j):");
    for i in 0..m {
        let zii = inverse.block(i * n, i * n, n, n).inf_norm();
        let mut row = String::new();
        for j in 0..m {
            let zij = inverse.block(i * n, j * n, n, n).inf_norm();
            let bound = zii * profile.off_diagonal_factor(i, j);
            row.push_str(&format!(" {:>6.3}", if bound > 0.0 { zij / bound } else { 1.0 }));
        }
        println!("  [{row} ]");
    }
    Ok(())
}
