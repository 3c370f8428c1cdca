//! Ready-made experiments over fixed parameter grids.

use super::{Design, Experiment, ExperimentConfig, ScenarioRow, SizePair, TestSpec};
use crate::asymptotics::SlopeConvention;
use crate::rank_tests::{Alternative, DecisionRule, RankTestConfig, ReferenceSample, Scheme};
use crate::sampling::{LehmannKind, MultivariateScenario};
use crate::scores::{ScoreFunction, ScoreMode};

fn sizes(ks: &[usize]) -> Vec<SizePair> {
    ks.iter().map(|&k| SizePair::equal(k)).collect()
}

/// Univariate Wilcoxon rank-sum test, randomized at the critical atom.
fn wilcoxon_univariate() -> TestSpec {
    TestSpec::Rank {
        label: "W".into(),
        scheme: Scheme::Simple,
        config: RankTestConfig {
            score: ScoreFunction::Wilcoxon,
            score_mode: ScoreMode::Exact,
            mixture_p_value: false,
            ..RankTestConfig::default()
        },
    }
}

/// Euclidean interpoint-distance Wilcoxon test used in the bivariate comparisons:
/// reference point drawn from the second sample, ranks summed over the first,
/// two-sided with the exact (or Monte Carlo) p-value.
pub(crate) fn wilcoxon_distance() -> TestSpec {
    TestSpec::Rank {
        label: "W".into(),
        scheme: Scheme::Randomized,
        config: RankTestConfig {
            score: ScoreFunction::Wilcoxon,
            score_mode: ScoreMode::Exact,
            reference: ReferenceSample::Second,
            alternative: Alternative::TwoSided,
            rule: DecisionRule::Nonrandomized,
            mixture_p_value: false,
            ..RankTestConfig::default()
        },
    }
}

pub fn table2() -> ExperimentConfig {
    let mut delta0: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    delta0.extend([2.0, 3.0]);
    ExperimentConfig {
        experiment: Experiment::Table2,
        tests: vec![wilcoxon_univariate(), TestSpec::Ks { label: "KS".into() }],
        design: Design::Lehmann {
            kind: LehmannKind::WilcoxonType,
            delta0,
        },
        sizes: sizes(&[30, 100, 500, 1000]),
        alpha: 0.05,
        replications: 100_000,
        seed: 2,
        workers: None,
    }
}

pub fn table3() -> ExperimentConfig {
    ExperimentConfig {
        experiment: Experiment::Table3,
        tests: Vec::new(),
        design: Design::Slopes {
            alphas: vec![0.001, 0.01, 0.025, 0.05, 0.1],
            convention: SlopeConvention::Unscaled,
        },
        sizes: Vec::new(),
        alpha: 0.05,
        replications: 1,
        seed: 3,
        workers: None,
    }
}

fn comparison_tests() -> Vec<TestSpec> {
    vec![TestSpec::Hotelling { label: "H".into() }, wilcoxon_distance()]
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

/// Bivariate normal second samples; the first sample is standard normal.
pub fn table4() -> ExperimentConfig {
    let grid: [([f64; 2], [f64; 2]); 13] = [
        ([0.0, 0.0], [1.0, 1.0]),
        ([0.2, 0.2], [1.0, 1.0]),
        ([0.5, 0.5], [1.0, 1.0]),
        ([0.0, 0.0], [0.1, 0.1]),
        ([0.0, 0.0], [0.2, 0.2]),
        ([0.0, 0.0], [0.5, 0.5]),
        ([0.0, 0.0], [1.5, 1.5]),
        ([0.0, 0.0], [2.0, 2.0]),
        ([0.0, 0.0], [1.0, 0.2]),
        ([0.1, 0.1], [1.1, 1.1]),
        ([0.1, 0.1], [1.5, 1.5]),
        ([0.2, 0.2], [1.0, 1.5]),
        ([0.2, 0.2], [1.5, 1.5]),
    ];
    let rows = grid
        .iter()
        .map(|(mu, s)| ScenarioRow {
            label: format!("mu=({},{}) Sigma=diag({},{})", fmt(mu[0]), fmt(mu[1]), fmt(s[0]), fmt(s[1])),
            scenario: MultivariateScenario::normal(mu.to_vec(), s.to_vec(), 10, 10),
        })
        .collect();
    ExperimentConfig {
        experiment: Experiment::Table4,
        tests: comparison_tests(),
        design: Design::Scenarios { rows },
        sizes: sizes(&[10, 100, 1000]),
        alpha: 0.05,
        replications: 10_000,
        seed: 4,
        workers: None,
    }
}

/// Bivariate spherical Cauchy second samples with shift 𝐦 and scale σ.
pub fn table5() -> ExperimentConfig {
    let grid: [(f64, f64); 13] = [
        (0.0, 1.0),
        (0.2, 1.0),
        (0.5, 1.0),
        (1.0, 1.0),
        (5.0, 1.0),
        (0.0, 1.5),
        (0.0, 2.0),
        (0.2, 1.5),
        (1.0, 1.5),
        (2.0, 1.5),
        (0.2, 2.0),
        (1.0, 2.0),
        (2.0, 2.0),
    ];
    let rows = grid
        .iter()
        .map(|&(m, s)| ScenarioRow {
            label: format!("m=({},{}) sigma={}", fmt(m), fmt(m), fmt(s)),
            scenario: MultivariateScenario::cauchy_spherical(vec![m, m], s, 10, 10),
        })
        .collect();
    ExperimentConfig {
        experiment: Experiment::Table5,
        tests: comparison_tests(),
        design: Design::Scenarios { rows },
        sizes: sizes(&[10, 25, 100, 1000]),
        alpha: 0.05,
        replications: 10_000,
        seed: 5,
        workers: None,
    }
}
