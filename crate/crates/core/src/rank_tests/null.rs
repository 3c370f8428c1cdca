use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::binomial;
use crate::rng::RngSeed;
use crate::scores::ScoreVector;

/// How a null distribution was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum NullMode {
    /// All `C(N, n)` rank subsets of the second group, equally weighted.
    ExactEnumeration,
    /// Exact rank-sum recursion; only for scores affine in the rank.
    ExactRecursion,
    /// Empirical law of `count` uniformly random rank subsets.
    MonteCarloPermutation { count: usize },
}

impl NullMode {
    pub fn is_exact(&self) -> bool {
        !matches!(self, Self::MonteCarloPermutation { .. })
    }
}

/// Which null computation to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullMethod {
    /// Recursion for affine scores, enumeration below the cap, Monte Carlo otherwise.
    Auto,
    Enumerate,
    Recursion,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NullOptions {
    pub method: NullMethod,
    /// Largest number of subsets exact enumeration may visit.
    pub enumeration_cap: u64,
    /// Largest `n × (range of the rank sum)` table the recursion may allocate.
    pub recursion_cells: u64,
    /// Draws for the Monte Carlo fallback.
    pub monte_carlo_count: usize,
}

impl Default for NullOptions {
    fn default() -> Self {
        Self {
            method: NullMethod::Auto,
            enumeration_cap: 10_000_000,
            recursion_cells: 20_000_000,
            monte_carlo_count: 100_000,
        }
    }
}

/// A discrete law on the values of a linear rank statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDistribution {
    support: Vec<f64>,
    probabilities: Vec<f64>,
    mode: NullMode,
    m: usize,
    n: usize,
    tolerance: f64,
}

impl NullDistribution {
    /// Builds a law from raw atoms, merging values closer than the tolerance.
    pub(crate) fn from_weighted(mut atoms: Vec<(f64, f64)>, mode: NullMode, m: usize, n: usize) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let spread = atoms.iter().fold(0.0f64, |s, a| s.max(a.0.abs()));
        let tolerance = 1e-10 * (1.0 + spread);
        let mut support: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut anchor = f64::NEG_INFINITY;
        for (v, w) in atoms {
            if w <= 0.0 {
                continue;
            }
            if v - anchor <= tolerance {
                *weights.last_mut().expect("anchored") += w;
            } else {
                anchor = v;
                support.push(v);
                weights.push(w);
            }
        }
        let total: f64 = weights.iter().sum();
        let probabilities = weights.into_iter().map(|w| w / total).collect();
        Self {
            support,
            probabilities,
            mode,
            m,
            n,
            tolerance,
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn mode(&self) -> NullMode {
        self.mode
    }

    /// Group sizes `(m, n)` of the permutation model.
    pub fn sizes(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    /// Values closer than this are treated as the same atom.
    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn mean(&self) -> f64 {
        self.support.iter().zip(&self.probabilities).map(|(s, p)| s * p).sum()
    }

    /// `(P(S < s), P(S = s), P(S > s))`, with equality up to the tolerance.
    pub fn split(&self, s: f64) -> (f64, f64, f64) {
        let (mut lt, mut eq, mut gt) = (0.0, 0.0, 0.0);
        for (&v, &p) in self.support.iter().zip(&self.probabilities) {
            if v < s - self.tolerance {
                lt += p;
            } else if v > s + self.tolerance {
                gt += p;
            } else {
                eq += p;
            }
        }
        (lt, eq, gt)
    }

    /// `P(S ≥ s)`.
    pub fn upper_tail(&self, s: f64) -> f64 {
        let (_, eq, gt) = self.split(s);
        (eq + gt).min(1.0)
    }

    /// `P(S ≤ s)`.
    pub fn lower_tail(&self, s: f64) -> f64 {
        let (lt, eq, _) = self.split(s);
        (lt + eq).min(1.0)
    }
}

/// Null law of `N^{-1/2} Σ_{k>m} a(R_k)` under random assignment of ranks.
pub fn null_distribution(m: usize, n: usize, scores: &ScoreVector, method: NullMethod, seed: RngSeed) -> Result<NullDistribution> {
    null_distribution_with(
        m,
        n,
        scores,
        &NullOptions {
            method,
            ..NullOptions::default()
        },
        seed,
    )
}

pub fn null_distribution_with(
    m: usize,
    n: usize,
    scores: &ScoreVector,
    options: &NullOptions,
    seed: RngSeed,
) -> Result<NullDistribution> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("group sizes must be positive, got m={m}, n={n}")));
    }
    if scores.len() != m + n {
        return Err(Error::LengthMismatch {
            expected: m + n,
            actual: scores.len(),
        });
    }
    let subsets = binomial((m + n) as u64, n as u64);
    match options.method {
        NullMethod::Enumerate => {
            if subsets > options.enumeration_cap as f64 {
                return Err(Error::EnumerationCap {
                    subsets,
                    cap: options.enumeration_cap,
                });
            }
            Ok(enumerate(m, n, scores))
        }
        NullMethod::Recursion => recursion(m, n, scores, options.recursion_cells),
        NullMethod::MonteCarlo => Ok(monte_carlo(m, n, scores, options.monte_carlo_count, seed)),
        NullMethod::Auto => {
            if scores.affine_in_rank().is_some() && recursion_cells(m, n) <= options.recursion_cells {
                recursion(m, n, scores, options.recursion_cells)
            } else if subsets <= options.enumeration_cap as f64 {
                Ok(enumerate(m, n, scores))
            } else {
                Ok(monte_carlo(m, n, scores, options.monte_carlo_count, seed))
            }
        }
    }
}

fn enumerate(m: usize, n: usize, scores: &ScoreVector) -> NullDistribution {
    let total = m + n;
    let a = scores.values();
    let scale = scores.scale();
    // Split on the smallest rank of the subset; each branch walks the
    // (n−1)-subsets of the ranks above it.
    let atoms: Vec<(f64, f64)> = (0..=m)
        .into_par_iter()
        .flat_map_iter(|first| {
            let rest = n - 1;
            let pool = total - first - 1;
            let mut local: Vec<f64> = Vec::new();
            let mut idx: Vec<usize> = (0..rest).collect();
            loop {
                let s = a[first] + idx.iter().map(|&i| a[first + 1 + i]).sum::<f64>();
                local.push(scale * s);
                // next combination of `rest` out of `pool`, lexicographic
                let mut k = rest;
                loop {
                    if k == 0 {
                        return compress(local).into_iter();
                    }
                    k -= 1;
                    if idx[k] < pool - rest + k {
                        idx[k] += 1;
                        for j in k + 1..rest {
                            idx[j] = idx[j - 1] + 1;
                        }
                        break;
                    }
                }
            }
        })
        .collect();
    NullDistribution::from_weighted(atoms, NullMode::ExactEnumeration, m, n)
}

fn compress(mut values: Vec<f64>) -> Vec<(f64, f64)> {
    values.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, f64)> = Vec::new();
    for v in values {
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 += 1.0,
            _ => out.push((v, 1.0)),
        }
    }
    out
}

fn recursion_cells(m: usize, n: usize) -> u64 {
    let range = (n * m + 1) as u64;
    (n as u64 + 1) * range
}

fn recursion(m: usize, n: usize, scores: &ScoreVector, cap: u64) -> Result<NullDistribution> {
    let (a, b) = scores
        .affine_in_rank()
        .ok_or_else(|| Error::InvalidArgument("the rank-sum recursion needs scores affine in the rank".into()))?;
    if recursion_cells(m, n) > cap {
        return Err(Error::InvalidArgument(format!(
            "rank-sum recursion for m={m}, n={n} needs {} cells, above the cap of {cap}",
            recursion_cells(m, n)
        )));
    }
    let total = m + n;
    // Offset rank sum W − j(j+1)/2 ∈ [0, j·(i−j)] for a j-subset of 1..i.
    // p[j][w]: probability that a uniformly random j-subset of 1..i has offset sum w.
    let width = n * m + 1;
    let mut p = vec![0.0f64; (n + 1) * width];
    p[0] = 1.0;
    for i in 1..=total {
        let top = n.min(i);
        for j in (1..=top).rev() {
            let keep = (i - j) as f64 / i as f64;
            let take = j as f64 / i as f64;
            // Taking rank i moves offset by i − j.
            let shift = i - j;
            let hi = (j * (i - j)).min(width - 1);
            for w in (0..=hi).rev() {
                let stay = if j < i { p[j * width + w] } else { 0.0 };
                let from = if w >= shift { p[(j - 1) * width + w - shift] } else { 0.0 };
                p[j * width + w] = keep * stay + take * from;
            }
        }
    }
    let scale = scores.scale();
    let base = (n * (n + 1) / 2) as f64;
    let atoms = (0..width)
        .map(|w| (scale * (n as f64 * a + b * (base + w as f64)), p[n * width + w]))
        .collect();
    Ok(NullDistribution::from_weighted(atoms, NullMode::ExactRecursion, m, n))
}

const CHUNK: usize = 4096;

fn monte_carlo(m: usize, n: usize, scores: &ScoreVector, count: usize, seed: RngSeed) -> NullDistribution {
    let total = m + n;
    let a = scores.values();
    let scale = scores.scale();
    let chunks = count.div_ceil(CHUNK);
    let atoms: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = seed.with_stream(c as u64).rng();
            let draws = CHUNK.min(count - c * CHUNK);
            let mut perm: Vec<usize> = (0..total).collect();
            let mut local = Vec::with_capacity(draws);
            for _ in 0..draws {
                let mut s = 0.0;
                for k in 0..n {
                    let j = rng.random_range(k..total);
                    perm.swap(k, j);
                    s += a[perm[k]];
                }
                local.push(scale * s);
            }
            compress(local).into_iter()
        })
        .collect();
    NullDistribution::from_weighted(atoms, NullMode::MonteCarloPermutation { count }, m, n)
}
