//! Exact and Monte Carlo null distributions and the randomized critical value.

use distrank::rank_tests::{null_distribution, randomized_critical_value, NullMethod};
use distrank::rng::RngSeed;
use distrank::scores::{score_vector, ScoreFunction, ScoreMode, ScoreVector};

fn main() -> distrank::error::Result<()> {
    let raw = ScoreVector::raw_ranks(4);
    let d = null_distribution(2, 2, &raw, NullMethod::Enumerate, RngSeed::new(0, 0))?;
    println!("rank sum of 2 out of 4:");
    for (s, p) in d.support().iter().zip(d.probabilities()) {
        println!("  {s:>3}  {p:.4}");
    }

    let (m, n) = (8, 7);
    let scores = score_vector(ScoreFunction::Savage, m + n, ScoreMode::Exact)?;
    let exact = null_distribution(m, n, &scores, NullMethod::Enumerate, RngSeed::new(0, 0))?;
    let mc = null_distribution(m, n, &scores, NullMethod::MonteCarlo, RngSeed::new(3, 0))?;
    for (name, d) in [("enumeration", &exact), ("Monte Carlo", &mc)] {
        let c = randomized_critical_value(d, 0.05)?;
        println!(
            "Savage m={m} n={n}, {name}: {} atoms, C = {:.5}, gamma = {:.4}, size = {:.6}",
            d.support().len(),
            c.c_alpha,
            c.gamma,
            c.size(d)
        );
    }

    let w = score_vector(ScoreFunction::Wilcoxon, 400, ScoreMode::Exact)?;
    let big = null_distribution(200, 200, &w, NullMethod::Auto, RngSeed::new(0, 0))?;
    println!("Wilcoxon m=n=200 via {:?}: {} atoms", big.mode(), big.support().len());
    Ok(())
}
