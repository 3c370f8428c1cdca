//! Draws pooled samples under the three Lehmann-type alternatives and compares
//! empirical and exact CDFs of the second sample.

use distrank::rng::RngSeed;
use distrank::sampling::{sample_lehmann_pooled, sample_lehmann_pooled_with, LehmannAlternative, LehmannKind, Which};

fn main() -> distrank::error::Result<()> {
    let (m, n) = (2_000, 2_000);
    for kind in LehmannKind::ALL {
        let alt = LehmannAlternative::new(kind, 0.5)?;
        let pooled = sample_lehmann_pooled(&alt, m, n, RngSeed::new(1, 0))?;
        let second = &pooled[m..];
        let (d_first, d_second) = alt.kolmogorov_distance();
        println!("{} (delta = 0.5), Kolmogorov distances {d_first:.4} / {d_second:.4}", kind.label());
        for u in [0.25, 0.5, 0.75] {
            let empirical = second.iter().filter(|&&v| v <= u).count() as f64 / n as f64;
            println!("  G2({u}) = {:.4}, empirical {empirical:.4}", alt.cdf(Which::Second, u)?);
        }
    }

    // Local alternative at N = 200 mapped to the exponential scale.
    let local = LehmannAlternative::local(LehmannKind::SavageType, 2.0, 200)?;
    let x = sample_lehmann_pooled_with(&local, 100, 100, RngSeed::new(2, 0), |u| -(1.0 - u).ln())?;
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    println!(
        "Savage-type at delta0 = 2, N = 200: delta = {:.4}, means {:.3} and {:.3}",
        local.delta(),
        mean(&x[..100]),
        mean(&x[100..])
    );
    Ok(())
}
