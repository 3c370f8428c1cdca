use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::PooledSample;
use crate::distances::{choose_basis, conditional_basis_distances, distances_from, BasisChoice, DistanceKernel, PreparedKernel};
use crate::error::{check_unit_open, Error, Result};
use crate::rng::RngSeed;
use crate::scores::{score_vector, ScoreFunction, ScoreMode, ScoreVector};

use super::critical::{Alternative, Calibration, DecisionRule};
use super::null::{null_distribution_with, NullMode, NullOptions};
use super::rank_with;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Ranks of the distances from the origin.
    Simple,
    /// Distances from one randomly chosen point of a `p`-point basis.
    Conditional,
    /// Distances from one randomly chosen reference observation.
    Randomized,
    KolmogorovSmirnov,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Self::Simple => "simple",
            Self::Conditional => "conditional",
            Self::Randomized => "randomized",
            Self::KolmogorovSmirnov => "ks",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simple" => Ok(Self::Simple),
            "conditional" => Ok(Self::Conditional),
            "randomized" => Ok(Self::Randomized),
            "ks" | "kolmogorov-smirnov" => Ok(Self::KolmogorovSmirnov),
            other => Err(Error::InvalidArgument(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Which sample the reference observation of the randomized scheme is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceSample {
    /// Reference `X_i`; the statistic sums the scores of the `Y` distances.
    First,
    /// Reference `Y_j`; the statistic sums the scores of the `X` distances.
    Second,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RankTestConfig {
    pub kernel: DistanceKernel,
    pub score: ScoreFunction,
    pub score_mode: ScoreMode,
    pub alpha: f64,
    pub null: NullOptions,
    pub alternative: Alternative,
    pub rule: DecisionRule,
    pub reference: ReferenceSample,
    /// Basis size for the conditional scheme; the dimension when unset.
    pub basis_size: Option<usize>,
    pub basis_choice: BasisChoice,
    /// Also report the p-value averaged over every possible reference point.
    pub mixture_p_value: bool,
}

impl Default for RankTestConfig {
    fn default() -> Self {
        Self {
            kernel: DistanceKernel::Euclidean,
            score: ScoreFunction::Wilcoxon,
            score_mode: ScoreMode::Exact,
            alpha: 0.05,
            null: NullOptions::default(),
            alternative: Alternative::Greater,
            rule: DecisionRule::Randomized,
            reference: ReferenceSample::First,
            basis_size: None,
            basis_choice: BasisChoice::First,
            mixture_p_value: true,
        }
    }
}

/// Seeds consumed by one test evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedTrail {
    pub base: Option<RngSeed>,
    pub tie: Option<RngSeed>,
    pub selection: Option<RngSeed>,
    pub null: Option<RngSeed>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTestResult {
    pub scheme: Scheme,
    pub statistic: f64,
    #[serde(rename = "C_alpha")]
    pub c_alpha: f64,
    pub gamma: f64,
    /// Rejection probability: 0, γ or 1.
    pub decision: f64,
    pub p_value: f64,
    /// p-value averaged over all reference points (randomized and conditional schemes).
    pub mixture_p_value: Option<f64>,
    /// 1-based index of the reference point or basis row that was drawn.
    pub selected: Option<usize>,
    pub null_mode: Option<NullMode>,
    pub alpha: f64,
    pub seeds: SeedTrail,
}

impl RankTestResult {
    /// Turns the rejection probability into a decision using a uniform draw `u`.
    pub fn realize(&self, u: f64) -> bool {
        u < self.decision
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// A test with its score vector and null calibration fixed for given group sizes,
/// so that repeated evaluations share the null computation.
#[derive(Debug, Clone)]
pub struct RankTestProcedure {
    scheme: Scheme,
    config: RankTestConfig,
    m: usize,
    n: usize,
    basis_size: usize,
    scores: ScoreVector,
    calibration: Calibration,
    null_seed: RngSeed,
}

impl RankTestProcedure {
    /// `dim` is only used for the default basis size of the conditional scheme.
    pub fn new(scheme: Scheme, config: RankTestConfig, m: usize, n: usize, dim: usize, seed: RngSeed) -> Result<Self> {
        check_unit_open("alpha", config.alpha)?;
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!("group sizes must be positive, got m={m}, n={n}")));
        }
        let basis_size = config.basis_size.unwrap_or(dim).max(1);
        // (score length, group sizes of the permutation model)
        let (len, null_m, null_n) = match scheme {
            Scheme::Simple => (m + n, m, n),
            Scheme::Randomized => match config.reference {
                ReferenceSample::First => (m + n - 1, m - 1, n),
                ReferenceSample::Second => (m + n - 1, n - 1, m),
            },
            Scheme::Conditional => {
                if m <= basis_size {
                    return Err(Error::InvalidArgument(format!(
                        "the conditional scheme needs m > p, got m={m}, p={basis_size}"
                    )));
                }
                (m + n - basis_size, m - basis_size, n)
            }
            Scheme::KolmogorovSmirnov => {
                return Err(Error::InvalidArgument(
                    "the Kolmogorov–Smirnov test is not a distance rank scheme; use ks_two_sample".into(),
                ))
            }
        };
        if null_m == 0 {
            return Err(Error::InvalidArgument(format!(
                "the {} scheme leaves no observations in the reference sample",
                scheme.label()
            )));
        }
        let scores = score_vector(config.score, len, config.score_mode)?;
        let null_seed = seed.derive(3);
        let null = null_distribution_with(null_m, null_n, &scores, &config.null, null_seed)?;
        let calibration = Calibration::new(null, config.alpha, config.alternative, config.rule)?;
        Ok(Self {
            scheme,
            config,
            m,
            n,
            basis_size,
            scores,
            calibration,
            null_seed,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn config(&self) -> &RankTestConfig {
        &self.config
    }

    pub fn scores(&self) -> &ScoreVector {
        &self.scores
    }

    pub fn calibration(&self) -> &Calibration {
        &self.calibration
    }

    pub fn basis_size(&self) -> usize {
        self.basis_size
    }

    fn check(&self, p: &PooledSample) -> Result<()> {
        if p.m() != self.m || p.n() != self.n {
            return Err(Error::InvalidArgument(format!(
                "procedure prepared for m={}, n={} but the sample has m={}, n={}",
                self.m,
                self.n,
                p.m(),
                p.n()
            )));
        }
        Ok(())
    }

    fn finish(&self, statistic: f64, mixture: Option<f64>, selected: Option<usize>, seeds: SeedTrail) -> RankTestResult {
        let cal = &self.calibration;
        RankTestResult {
            scheme: self.scheme,
            statistic,
            c_alpha: cal.upper.c_alpha,
            gamma: cal.upper.gamma,
            decision: cal.decision(statistic),
            p_value: cal.p_value(statistic),
            mixture_p_value: mixture,
            selected,
            null_mode: Some(cal.null.mode()),
            alpha: cal.alpha,
            seeds: SeedTrail {
                null: Some(self.null_seed),
                ..seeds
            },
        }
    }

    /// Evaluates the test on one pooled sample.
    pub fn run(&self, p: &PooledSample, seed: RngSeed) -> Result<RankTestResult> {
        self.check(p)?;
        match self.scheme {
            Scheme::Simple => self.run_simple(p, seed),
            Scheme::Randomized => self.run_randomized(p, seed),
            Scheme::Conditional => {
                let basis = choose_basis(p, self.basis_size, self.config.basis_choice, seed.derive(5))?;
                self.run_conditional(p, &basis, seed)
            }
            Scheme::KolmogorovSmirnov => unreachable!("rejected at construction"),
        }
    }

    fn run_simple(&self, p: &PooledSample, seed: RngSeed) -> Result<RankTestResult> {
        let kernel = PreparedKernel::new(p, self.config.kernel)?;
        let d: Vec<f64> = (0..p.total()).map(|k| kernel.from_origin(p, k)).collect();
        let tie = seed.derive(1);
        let ranks = rank_with(&d, &mut tie.rng());
        let s = group_statistic(ranks.ranks(), p.m()..p.total(), &self.scores);
        Ok(self.finish(
            s,
            None,
            None,
            SeedTrail {
                base: Some(seed),
                tie: Some(tie),
                ..SeedTrail::default()
            },
        ))
    }

    fn run_randomized(&self, p: &PooledSample, seed: RngSeed) -> Result<RankTestResult> {
        let kernel = PreparedKernel::new(p, self.config.kernel)?;
        let (m, n) = (p.m(), p.n());
        // Pooled indices of the reference candidates, and the positions of the
        // summed group once the reference is removed.
        let (candidates, summed) = match self.config.reference {
            ReferenceSample::First => (0..m, m - 1..m + n - 1),
            ReferenceSample::Second => (m..m + n, 0..m),
        };
        let tie = seed.derive(1);
        let selection = seed.derive(2);
        let mut tie_rng = tie.rng();
        let statistic_at = |reference: usize, rng: &mut rand_chacha::ChaCha8Rng| {
            let d = distances_from(p, reference, &kernel);
            let ranks = rank_with(&d, rng);
            group_statistic(ranks.ranks(), summed.clone(), &self.scores)
        };
        let pick = candidates.start + selection.rng().random_range(0..candidates.len());
        let s = statistic_at(pick, &mut tie_rng);
        let mixture = self.config.mixture_p_value.then(|| {
            let mut rng = tie.derive(1).rng();
            candidates
                .clone()
                .map(|r| self.calibration.p_value(statistic_at(r, &mut rng)))
                .sum::<f64>()
                / candidates.len() as f64
        });
        Ok(self.finish(
            s,
            mixture,
            Some(pick - candidates.start + 1),
            SeedTrail {
                base: Some(seed),
                tie: Some(tie),
                selection: Some(selection),
                null: None,
            },
        ))
    }

    /// The conditional scheme on an explicit 1-based basis.
    pub fn run_conditional(&self, p: &PooledSample, basis: &[usize], seed: RngSeed) -> Result<RankTestResult> {
        self.check(p)?;
        if basis.len() != self.basis_size {
            return Err(Error::LengthMismatch {
                expected: self.basis_size,
                actual: basis.len(),
            });
        }
        let table = conditional_basis_distances(p, basis, self.config.kernel)?;
        let cols = table.columns.len();
        let summed = cols - p.n()..cols;
        let tie = seed.derive(1);
        let selection = seed.derive(2);
        let mut tie_rng = tie.rng();
        let row_statistic = |j: usize, rng: &mut rand_chacha::ChaCha8Rng| {
            let d: Vec<f64> = table.distances.row(j).iter().copied().collect();
            group_statistic(rank_with(&d, rng).ranks(), summed.clone(), &self.scores)
        };
        let j = selection.rng().random_range(0..basis.len());
        let s = row_statistic(j, &mut tie_rng);
        let mixture = self.config.mixture_p_value.then(|| {
            let mut rng = tie.derive(1).rng();
            (0..basis.len())
                .map(|r| self.calibration.p_value(row_statistic(r, &mut rng)))
                .sum::<f64>()
                / basis.len() as f64
        });
        Ok(self.finish(
            s,
            mixture,
            Some(j + 1),
            SeedTrail {
                base: Some(seed),
                tie: Some(tie),
                selection: Some(selection),
                null: None,
            },
        ))
    }
}

pub(crate) fn group_statistic(ranks: &[usize], group: Range<usize>, scores: &ScoreVector) -> f64 {
    let a = scores.values();
    scores.scale() * ranks[group].iter().map(|&r| a[r - 1]).sum::<f64>()
}

/// Ranks of the distances from the origin, scored and summed over the second sample.
pub fn simple_rank_test(p: &PooledSample, config: &RankTestConfig, seed: RngSeed) -> Result<RankTestResult> {
    RankTestProcedure::new(Scheme::Simple, config.clone(), p.m(), p.n(), p.dim(), seed)?.run(p, seed)
}

/// Conditional scheme on the 1-based `basis` drawn from the first sample.
pub fn conditional_rank_test(p: &PooledSample, basis: &[usize], config: &RankTestConfig, seed: RngSeed) -> Result<RankTestResult> {
    let config = RankTestConfig {
        basis_size: Some(basis.len()),
        ..config.clone()
    };
    RankTestProcedure::new(Scheme::Conditional, config, p.m(), p.n(), p.dim(), seed)?.run_conditional(p, basis, seed)
}

/// Randomized scheme: distances from one uniformly chosen reference observation.
pub fn randomized_rank_test(p: &PooledSample, config: &RankTestConfig, seed: RngSeed) -> Result<RankTestResult> {
    RankTestProcedure::new(Scheme::Randomized, config.clone(), p.m(), p.n(), p.dim(), seed)?.run(p, seed)
}
