//! Experiment configuration, seeded Monte Carlo power estimation and table
//! emission.
//!
//! Every replication reads its own random stream, keyed by the master seed,
//! the cell and the replication index, so a table is reproducible bit for
//! bit whatever the number of worker threads.

mod power;
mod presets;
mod table;

pub use power::{cells, estimate_power, run_experiment, CellData, CellSpec, PowerEstimate};
pub use presets::{table2, table3, table4, table5};
pub use table::{
    contiguity_table, efficiency_table, emit_table, read_table_csv, slope_table, wilcoxon_power_table, write_table,
    OutputFormat, ResultTable, TableRow,
};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::asymptotics::SlopeConvention;
use crate::error::{Error, Result};
use crate::rank_tests::{RankTestConfig, Scheme};
use crate::sampling::{LehmannKind, MultivariateScenario};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "DISTRANK_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Table2,
    Table3,
    Table4,
    Table5,
    Custom,
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', ' '], "").as_str() {
            "table2" => Ok(Self::Table2),
            "table3" => Ok(Self::Table3),
            "table4" => Ok(Self::Table4),
            "table5" => Ok(Self::Table5),
            "custom" => Ok(Self::Custom),
            other => Err(Error::InvalidArgument(format!("unknown experiment '{other}'"))),
        }
    }
}

/// A test column of a power table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TestSpec {
    Rank {
        label: String,
        scheme: Scheme,
        #[serde(default)]
        config: RankTestConfig,
    },
    /// One-sided Kolmogorov–Smirnov with the asymptotic critical value; univariate designs only.
    Ks { label: String },
    Hotelling { label: String },
    LiuSingh { label: String, permutations: usize },
}

impl TestSpec {
    pub fn label(&self) -> &str {
        match self {
            Self::Rank { label, .. } | Self::Ks { label } | Self::Hotelling { label } | Self::LiuSingh { label, .. } => label,
        }
    }
}

/// A named second-sample scenario; its group sizes are replaced by the size grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub label: String,
    pub scenario: MultivariateScenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Design {
    /// Univariate Lehmann alternatives on the uniform scale, `Δ = Δ₀/√N`.
    Lehmann { kind: LehmannKind, delta0: Vec<f64> },
    /// Multivariate scenarios.
    Scenarios { rows: Vec<ScenarioRow> },
    /// Slopes of the local power curves at the listed levels.
    Slopes { alphas: Vec<f64>, convention: SlopeConvention },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizePair {
    pub m: usize,
    pub n: usize,
}

impl SizePair {
    pub fn equal(k: usize) -> Self {
        Self { m: k, n: k }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub tests: Vec<TestSpec>,
    pub design: Design,
    #[serde(default)]
    pub sizes: Vec<SizePair>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; falls back to the environment variable, then to the number of CPUs.
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_alpha() -> f64 {
    0.05
}

fn default_replications() -> usize {
    10_000
}

impl ExperimentConfig {
    pub fn preset(experiment: Experiment) -> Result<Self> {
        match experiment {
            Experiment::Table2 => Ok(table2()),
            Experiment::Table3 => Ok(table3()),
            Experiment::Table4 => Ok(table4()),
            Experiment::Table5 => Ok(table5()),
            Experiment::Custom => Err(Error::Config("the custom experiment has no preset; supply a config file".into())),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Loads a `.toml` or `.json` configuration.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Self::from_toml_str(&text),
            _ => Self::from_json_str(&text),
        }
    }

    pub fn with_sizes(mut self, sizes: &[usize]) -> Self {
        self.sizes = sizes.iter().map(|&k| SizePair::equal(k)).collect();
        self
    }

    pub fn with_replications(mut self, reps: usize) -> Self {
        self.replications = reps;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }

    /// Keeps only the design rows whose label (or Δ₀ value) satisfies `keep`.
    pub fn retain_rows<F: Fn(&str) -> bool>(mut self, keep: F) -> Self {
        match &mut self.design {
            Design::Lehmann { delta0, .. } => delta0.retain(|d| keep(&format_delta(*d))),
            Design::Scenarios { rows } => rows.retain(|r| keep(&r.label)),
            Design::Slopes { .. } => {}
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if let Design::Slopes { alphas, .. } = &self.design {
            if alphas.is_empty() {
                return Err(Error::Config("the slope grid is empty".into()));
            }
            return Ok(());
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(Error::Config("the sample-size grid is empty".into()));
        }
        if self.tests.is_empty() {
            return Err(Error::Config("no tests selected".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be positive".into()));
        }
        let mut labels: Vec<&str> = self.tests.iter().map(|t| t.label()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("test labels must be distinct".into()));
        }
        for s in &self.sizes {
            if s.m == 0 || s.n == 0 {
                return Err(Error::Config("group sizes must be positive".into()));
            }
        }
        match &self.design {
            Design::Lehmann { kind, delta0 } => {
                if delta0.is_empty() {
                    return Err(Error::Config("the Δ₀ grid is empty".into()));
                }
                for s in &self.sizes {
                    for &d in delta0 {
                        crate::sampling::LehmannAlternative::local(*kind, d, s.m + s.n)
                            .map_err(|e| Error::Config(format!("Δ₀ = {d} at m={}, n={}: {e}", s.m, s.n)))?;
                    }
                }
            }
            Design::Scenarios { rows } => {
                if rows.is_empty() {
                    return Err(Error::Config("no scenarios".into()));
                }
                for r in rows {
                    for s in &self.sizes {
                        r.scenario
                            .with_sizes(s.m, s.n)
                            .validate()
                            .map_err(|e| Error::Config(format!("scenario '{}': {e}", r.label)))?;
                    }
                }
                if let Some(t) = self.tests.iter().find(|t| matches!(t, TestSpec::Ks { .. })) {
                    if rows.iter().any(|r| r.scenario.dimension != 1) {
                        return Err(Error::Config(format!(
                            "test '{}' is univariate but the design has multivariate scenarios",
                            t.label()
                        )));
                    }
                }
            }
            Design::Slopes { .. } => unreachable!(),
        }
        Ok(())
    }

    /// Worker count: config, then the environment, then the number of CPUs.
    pub fn resolved_workers(&self) -> usize {
        self.workers
            .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()))
            .filter(|&w| w > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

pub(crate) fn format_delta(d: f64) -> String {
    format!("{d:.1}")
}
