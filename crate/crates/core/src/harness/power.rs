use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::{Deserialize, Serialize};

use super::table::{ResultTable, TableRow};
use super::{format_delta, Design, ExperimentConfig, SizePair, TestSpec};
use crate::classical::{hotelling_test, liu_singh_test, DepthCalibration};
use crate::data::{MultivariateSample, PooledSample};
use crate::error::{Error, Result};
use crate::rank_tests::ks::ks_result;
use crate::rank_tests::{KsStatistic, RankTestProcedure};
use crate::rng::RngSeed;
use crate::sampling::{sample_lehmann_into, LehmannAlternative, LehmannKind, MultivariateScenario, PreparedScenario};

/// Data-generating part of one cell.
#[derive(Debug, Clone, PartialEq)]
pub enum CellData {
    Lehmann(LehmannAlternative),
    Scenario(MultivariateScenario),
}

/// One (design row, sample size, test) cell of a power experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSpec {
    pub row: String,
    pub size: SizePair,
    pub test: TestSpec,
    pub data: CellData,
    pub alpha: f64,
    pub replications: usize,
    pub master_seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub rejection_rate: f64,
    /// Replications that produced a decision.
    pub replications: usize,
    pub std_error: f64,
    /// Key of the data streams of the cell.
    pub seed: RngSeed,
    pub wall_time: Duration,
    pub failures: usize,
    /// How the null law of a rank test was obtained.
    pub null_mode: Option<String>,
}

// FNV-1a, for turning cell labels into seed labels.
fn fnv(s: &str) -> u64 {
    s.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

impl CellSpec {
    pub fn data_seed(&self) -> RngSeed {
        RngSeed::new(self.master_seed, 0).derive(fnv(&format!("{}|{}|{}", self.row, self.size.m, self.size.n)))
    }

    pub fn test_seed(&self) -> RngSeed {
        self.data_seed().derive(fnv(self.test.label()))
    }
}

enum Generator {
    Lehmann(LehmannAlternative),
    Scenario(PreparedScenario),
}

enum Evaluator {
    Rank(Box<RankTestProcedure>),
    Ks,
    Hotelling,
    LiuSingh(usize),
}

struct Draw {
    pooled: PooledSample,
    values: Option<Vec<f64>>,
}

impl Draw {
    fn groups(&self) -> (MultivariateSample, MultivariateSample) {
        (self.pooled.first(), self.pooled.second())
    }
}

struct Prepared {
    generator: Generator,
    evaluator: Evaluator,
    m: usize,
    n: usize,
    alpha: f64,
}

impl Prepared {
    fn new(cell: &CellSpec) -> Result<Self> {
        let SizePair { m, n } = cell.size;
        let (generator, dim) = match &cell.data {
            CellData::Lehmann(alt) => (Generator::Lehmann(*alt), 1),
            CellData::Scenario(s) => {
                let s = s.with_sizes(m, n);
                (Generator::Scenario(s.prepare()?), s.dimension)
            }
        };
        let evaluator = match &cell.test {
            TestSpec::Rank { scheme, config, .. } => {
                let mut config = config.clone();
                config.alpha = cell.alpha;
                Evaluator::Rank(Box::new(RankTestProcedure::new(*scheme, config, m, n, dim, cell.test_seed())?))
            }
            TestSpec::Ks { .. } => {
                if dim != 1 {
                    return Err(Error::Config("the Kolmogorov–Smirnov test needs univariate data".into()));
                }
                Evaluator::Ks
            }
            TestSpec::Hotelling { .. } => Evaluator::Hotelling,
            TestSpec::LiuSingh { permutations, .. } => Evaluator::LiuSingh(*permutations),
        };
        Ok(Self {
            generator,
            evaluator,
            m,
            n,
            alpha: cell.alpha,
        })
    }

    fn draw(&self, seed: RngSeed) -> Result<Draw> {
        let mut rng = seed.rng();
        match &self.generator {
            Generator::Lehmann(alt) => {
                let values = sample_lehmann_into(alt, self.m, self.n, &mut rng)?;
                let z = DMatrix::from_column_slice(values.len(), 1, &values);
                Ok(Draw {
                    pooled: PooledSample::from_matrix(z, self.m)?,
                    values: Some(values),
                })
            }
            Generator::Scenario(s) => {
                let (x, y) = s.sample(&mut rng);
                Ok(Draw {
                    pooled: PooledSample::new(&x, &y)?,
                    values: None,
                })
            }
        }
    }

    /// Rejection indicator of replication `r`.
    fn replicate(&self, data_seed: RngSeed, test_seed: RngSeed, r: u64) -> Result<bool> {
        let draw = self.draw(data_seed.with_stream(r))?;
        let seed = test_seed.with_stream(r);
        match &self.evaluator {
            Evaluator::Rank(proc) => {
                let res = proc.run(&draw.pooled, seed)?;
                let u: f64 = seed.derive(9).rng().random();
                Ok(res.realize(u))
            }
            Evaluator::Ks => {
                let values = draw.values.as_deref().expect("univariate draw");
                let s = KsStatistic::from_pooled(values, self.m)?;
                Ok(ks_result(&s, self.alpha).decision >= 1.0)
            }
            Evaluator::Hotelling => {
                let (x, y) = draw.groups();
                Ok(hotelling_test(&x, &y, self.alpha)?.reject)
            }
            Evaluator::LiuSingh(count) => {
                let (x, y) = draw.groups();
                let cal = DepthCalibration::Permutation {
                    count: *count,
                    seed: seed.derive(11),
                };
                Ok(liu_singh_test(&x, &y, self.alpha, cal)?.reject)
            }
        }
    }

    fn null_mode(&self) -> Option<String> {
        match &self.evaluator {
            Evaluator::Rank(p) => Some(format!("{:?}", p.calibration().null.mode())),
            _ => None,
        }
    }
}

#[derive(Default)]
struct Tally {
    rejections: usize,
    done: usize,
    failures: usize,
    // lowest failing replication and its error
    first_error: Option<(u64, String)>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.rejections += other.rejections;
        self.done += other.done;
        self.failures += other.failures;
        self.first_error = match (self.first_error, other.first_error) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }
}

fn build_pool(workers: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Estimates the rejection rate of one cell.
pub fn estimate_power(cell: &CellSpec) -> Result<PowerEstimate> {
    let pool = build_pool(cell.workers)?;
    estimate_in(&pool, cell)
}

fn estimate_in(pool: &ThreadPool, cell: &CellSpec) -> Result<PowerEstimate> {
    if cell.replications == 0 {
        return Err(Error::Config("replications must be at least 1".into()));
    }
    let start = Instant::now();
    let prepared = Prepared::new(cell)?;
    let (data_seed, test_seed) = (cell.data_seed(), cell.test_seed());
    let tally = pool.install(|| {
        (0..cell.replications as u64)
            .into_par_iter()
            .fold(Tally::default, |mut t, r| {
                match prepared.replicate(data_seed, test_seed, r) {
                    Ok(rej) => {
                        t.done += 1;
                        t.rejections += usize::from(rej);
                    }
                    Err(e) => {
                        t.failures += 1;
                        if t.first_error.as_ref().is_none_or(|(k, _)| r < *k) {
                            t.first_error = Some((r, e.to_string()));
                        }
                    }
                }
                t
            })
            .reduce(Tally::default, Tally::merge)
    });
    if tally.failures * 1000 > cell.replications || tally.done == 0 {
        let (r, msg) = tally.first_error.unwrap_or_default();
        return Err(Error::InvalidArgument(format!(
            "{} of {} replications failed (first at replication {r}: {msg})",
            tally.failures, cell.replications
        )));
    }
    let rate = tally.rejections as f64 / tally.done as f64;
    Ok(PowerEstimate {
        rejection_rate: rate,
        replications: tally.done,
        std_error: (rate * (1.0 - rate) / tally.done as f64).sqrt(),
        seed: data_seed,
        wall_time: start.elapsed(),
        failures: tally.failures,
        null_mode: prepared.null_mode(),
    })
}

/// The cells of a Monte Carlo experiment, in output order.
pub fn cells(config: &ExperimentConfig) -> Result<Vec<CellSpec>> {
    let workers = config.resolved_workers();
    enum Row<'a> {
        Lehmann(LehmannKind, f64),
        Scenario(&'a MultivariateScenario),
    }
    let rows: Vec<(String, Row)> = match &config.design {
        Design::Lehmann { kind, delta0 } => delta0.iter().map(|&d| (format_delta(d), Row::Lehmann(*kind, d))).collect(),
        Design::Scenarios { rows } => rows.iter().map(|r| (r.label.clone(), Row::Scenario(&r.scenario))).collect(),
        Design::Slopes { .. } => return Ok(Vec::new()),
    };
    let mut out = Vec::new();
    for (label, row) in &rows {
        for &size in &config.sizes {
            let data = match row {
                Row::Lehmann(kind, d) => CellData::Lehmann(LehmannAlternative::local(*kind, *d, size.m + size.n)?),
                Row::Scenario(s) => CellData::Scenario(s.with_sizes(size.m, size.n)),
            };
            for test in &config.tests {
                out.push(CellSpec {
                    row: label.clone(),
                    size,
                    test: test.clone(),
                    data: data.clone(),
                    alpha: config.alpha,
                    replications: config.replications,
                    master_seed: config.seed,
                    workers,
                });
            }
        }
    }
    Ok(out)
}

/// Runs every cell; a failing cell is recorded in its row and the run goes on.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    if let Design::Slopes { alphas, convention } = &config.design {
        return super::table::slope_table(alphas, *convention);
    }
    let pool = build_pool(config.resolved_workers())?;
    let mut table = ResultTable::power(&format!("{:?}", config.experiment));
    for cell in cells(config)? {
        let keys = vec![
            cell.row.clone(),
            cell.size.m.to_string(),
            cell.size.n.to_string(),
            cell.test.label().to_string(),
        ];
        let row = match estimate_in(&pool, &cell) {
            Ok(est) => TableRow::estimate(keys, &est),
            Err(e) => TableRow::failed(keys, cell.replications, cell.data_seed(), &e.to_string()),
        };
        table.rows.push(row);
    }
    Ok(table)
}
