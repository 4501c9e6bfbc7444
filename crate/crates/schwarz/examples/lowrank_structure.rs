//! The sweep operator never needs to be formed: it factors as a tall block
//! column times a selector, with powers governed by one n-by-n kernel. This
//! example prints the factors on the scalar chain and checks the numerical
//! rank on a sampled instance.

use schwarz::{
    build_sweep_operator, random_dominant_system, sample_rng, BlockArrowSystem, BlockTridiagonal,
    Matrix, NormKind, SweepOrdering,
};

fn scalar_chain() -> BlockArrowSystem {
    let one = |v: f64| Matrix::new(1, 1, vec![v]).unwrap();
    let wing = |v: f64| BlockTridiagonal::toeplitz(1, one(0.0), one(v), one(0.0)).unwrap();
    BlockArrowSystem::assemble(
        wing(2.0),
        wing(2.0),
        one(2.0),
        one(-1.0),
        one(-1.0),
        one(-1.0),
        one(-1.0),
    )
    .unwrap()
}

fn main() -> anyhow::Result<()> {
    let chain = scalar_chain();
    let t = build_sweep_operator(&chain, SweepOrdering::T12)?;
    println!("scalar chain (n = 1, m = 1):");
    println!("  kernel = {:.6}", t.kernel()[(0, 0)]);
    println!("  norm   = {:.6}", t.norm(NormKind::Inf)?);
    println!("  dense form:");
    let dense = t.materialize()?;
    for i in 0..dense.rows() {
        let row: Vec<String> = (0..dense.cols()).map(|j| format!("{:7.4}", dense[(i, j)])).collect();
        println!("    [{}]", row.join(" "));
    }

    let mut rng = sample_rng(schwarz::resolve_seed(None));
    let sys = random_dominant_system(&mut rng, 4, 5)?;
    let t = build_sweep_operator(&sys, SweepOrdering::T12)?;
    let svals = t.materialize()?.singular_values()?;
    let rank = svals.iter().filter(|s| **s > svals[0] * 1e-12).count();
    println!();
    println!(
        "sampled instance: dim = {}, block size n = {}, numerical rank of T = {rank}",
        sys.dim(),
        sys.block_dim()
    );
    println!("powers contract by the kernel norm {:.4e}:", t.convergence_factor(NormKind::Inf)?);
    for k in 0..5 {
        println!("  ||T^{}|| scale: {:.6e}", k + 1, t.power_kernel(k).inf_norm());
    }
    Ok(())
}
