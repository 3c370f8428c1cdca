//! Mahalanobis depth, the quality index and the Liu–Singh permutation test.

use distrank::classical::{liu_singh_test, mahalanobis_depth, quality_index, DepthCalibration};
use distrank::rng::RngSeed;
use distrank::sampling::{sample_scenario, MultivariateScenario};

fn main() -> distrank::error::Result<()> {
    for (label, diag) in [("equal scales", 1.0), ("second sample spread x4", 4.0)] {
        let sc = MultivariateScenario::normal(vec![0.0, 0.0], vec![diag, diag], 60, 60);
        let (x, y) = sample_scenario(&sc, RngSeed::new(5, 0))?;
        let q = quality_index(&x, &y)?;
        let cal = DepthCalibration::Permutation {
            count: 999,
            seed: RngSeed::new(5, 1),
        };
        let t = liu_singh_test(&x, &y, 0.05, cal)?;
        let d0 = mahalanobis_depth(&y.row(0), &x)?;
        println!("{label}: Q = {q:.4}, p = {:.4}, reject = {}, depth of first y = {d0:.4}", t.p_value, t.reject);
    }
    Ok(())
}
