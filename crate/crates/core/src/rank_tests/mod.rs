//! Linear rank statistics on distances, their permutation null distributions,
//! randomized critical values, the simple, conditional and randomized
//! distance-based tests, and the one-sided two-sample Kolmogorov–Smirnov test.

mod critical;
pub(crate) mod ks;
mod null;
mod schemes;

pub use critical::{
    randomized_critical_value, randomized_lower_critical_value, Alternative, Calibration, DecisionRule,
    RandomizedCriticalValue, Tail,
};
pub use ks::{ks_exact_p_value, ks_two_sample, KsStatistic};
pub use null::{null_distribution, null_distribution_with, NullDistribution, NullMethod, NullMode, NullOptions};
pub use schemes::{
    conditional_rank_test, randomized_rank_test, simple_rank_test, RankTestConfig, RankTestProcedure,
    RankTestResult, ReferenceSample, Scheme, SeedTrail,
};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngSeed;
use crate::scores::ScoreVector;

/// How exact ties among the values were resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// Tied values receive their block of ranks in uniformly random order.
    RandomBreak,
}

/// Ranks `R₁..R_N`, a permutation of `1..N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankVector {
    ranks: Vec<usize>,
    ties: TiePolicy,
    tied_values: usize,
}

impl RankVector {
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn tie_policy(&self) -> TiePolicy {
        self.ties
    }

    /// Number of values that were part of a tie.
    pub fn tied_values(&self) -> usize {
        self.tied_values
    }

    /// 1-based rank of the 1-based observation `i`.
    pub fn get(&self, i: usize) -> usize {
        self.ranks[i - 1]
    }

    /// Builds a rank vector from an explicit permutation of `1..N`.
    pub fn from_permutation(ranks: Vec<usize>) -> Result<Self> {
        let n = ranks.len();
        let mut seen = vec![false; n];
        for &r in &ranks {
            if r == 0 || r > n || std::mem::replace(&mut seen[r - 1], true) {
                return Err(Error::InvalidArgument(format!("{ranks:?} is not a permutation of 1..{n}")));
            }
        }
        Ok(Self {
            ranks,
            ties: TiePolicy::RandomBreak,
            tied_values: 0,
        })
    }
}

/// Ranks of `values`, breaking exact ties at random with `tie_seed`.
pub fn rank(values: &[f64], tie_seed: RngSeed) -> Result<RankVector> {
    if values.len() < 2 {
        return Err(Error::InvalidArgument("ranking needs at least two values".into()));
    }
    if let Some(bad) = values.iter().find(|v| v.is_nan()) {
        return Err(Error::Domain {
            name: "value",
            value: *bad,
            domain: "non-NaN reals",
        });
    }
    let mut rng = tie_seed.rng();
    Ok(rank_with(values, &mut rng))
}

pub(crate) fn rank_with<R: Rng + ?Sized>(values: &[f64], rng: &mut R) -> RankVector {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut tied_values = 0;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        if end - start > 1 {
            tied_values += end - start;
            order[start..end].shuffle(rng);
        }
        start = end;
    }
    let mut ranks = vec![0; n];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    RankVector {
        ranks,
        ties: TiePolicy::RandomBreak,
        tied_values,
    }
}

fn check_lengths(ranks: &RankVector, m: usize, scores: &ScoreVector) -> Result<()> {
    if ranks.len() != scores.len() {
        return Err(Error::LengthMismatch {
            expected: scores.len(),
            actual: ranks.len(),
        });
    }
    if m == 0 || m >= ranks.len() {
        return Err(Error::InvalidArgument(format!(
            "first group size {m} must lie in 1..{}",
            ranks.len()
        )));
    }
    Ok(())
}

/// `S_N = N^{-1/2} Σ_{k>m} a_N(R_k)`.
pub fn linear_rank_statistic(ranks: &RankVector, m: usize, scores: &ScoreVector) -> Result<f64> {
    check_lengths(ranks, m, scores)?;
    Ok(second_group_statistic(ranks.ranks(), m, scores))
}

pub(crate) fn second_group_statistic(ranks: &[usize], m: usize, scores: &ScoreVector) -> f64 {
    let a = scores.values();
    scores.scale() * ranks[m..].iter().map(|&r| a[r - 1]).sum::<f64>()
}

/// `S*_N = N^{-1/2} [ −(n/N) Σ_{i≤m} a(R_i) + (m/N) Σ_{i>m} a(R_i) ]`.
pub fn centered_statistic(ranks: &RankVector, m: usize, scores: &ScoreVector) -> Result<f64> {
    check_lengths(ranks, m, scores)?;
    let a = scores.values();
    let total = ranks.len() as f64;
    let n = total - m as f64;
    let first: f64 = ranks.ranks()[..m].iter().map(|&r| a[r - 1]).sum();
    let second: f64 = ranks.ranks()[m..].iter().map(|&r| a[r - 1]).sum();
    Ok(scores.scale() * (-(n / total) * first + (m as f64 / total) * second))
}
