//! Invariance of the test statistics: interpoint distances under shifts,
//! Hotelling and the maximal invariant under affine maps.

use distrank::classical::hotelling_test;
use distrank::data::PooledSample;
use distrank::distances::{interpoint_distances, maximal_invariant, InvariantGroup, DistanceKernel};
use distrank::rng::RngSeed;
use distrank::sampling::{sample_scenario, MultivariateScenario};
use nalgebra::{DMatrix, DVector};

fn main() -> distrank::error::Result<()> {
    let sc = MultivariateScenario::normal(vec![0.3, 0.0], vec![1.0, 2.0], 12, 10);
    let (x, y) = sample_scenario(&sc, RngSeed::new(3, 0))?;
    let p = PooledSample::new(&x, &y)?;
    let shift = DVector::from_vec(vec![10.0, -4.0]);
    let b = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, -0.5, 3.0]);
    let moved = p.affine(&shift, &b);
    let shifted = p.affine(&shift, &DMatrix::identity(2, 2));

    let d0 = interpoint_distances(&p, 1, DistanceKernel::Euclidean)?;
    let d1 = interpoint_distances(&shifted, 1, DistanceKernel::Euclidean)?;
    let gap = d0.iter().zip(&d1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("Euclidean distances from Z_1 after a shift: max change {gap:.2e}");

    let m0 = interpoint_distances(&p, 1, DistanceKernel::MahalanobisCentered)?;
    let m1 = interpoint_distances(&moved, 1, DistanceKernel::MahalanobisCentered)?;
    let gap = m0.iter().zip(&m1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("Mahalanobis distances after an affine map: max change {gap:.2e}");

    let h0 = hotelling_test(&p.first(), &p.second(), 0.05)?;
    let h1 = hotelling_test(&moved.first(), &moved.second(), 0.05)?;
    println!("Hotelling T^2: {:.10} vs {:.10}", h0.t2, h1.t2);

    let t0 = maximal_invariant(&p, InvariantGroup::Affine)?;
    let t1 = maximal_invariant(&moved, InvariantGroup::Affine)?;
    println!(
        "maximal invariant: max change {:.2e}, |T^2 - T| = {:.2e}, trace = {:.6}",
        (&t0 - &t1).abs().max(),
        (&t0 * &t0 - &t0).abs().max(),
        t0.trace()
    );
    Ok(())
}
