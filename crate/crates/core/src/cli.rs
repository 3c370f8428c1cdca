//! Command-line front end. [`run_cli`] is the whole program; the binary only
//! forwards `std::env::args` and the standard streams to it.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;

use crate::asymptotics::SlopeConvention;
use crate::classical::{hotelling_test, liu_singh_test, DepthCalibration};
use crate::data::{read_csv_path, split_groups, MultivariateSample, PooledSample};
use crate::distances::DistanceKernel;
use crate::error::{Error, Result};
use crate::harness::{
    contiguity_table, efficiency_table, emit_table, run_experiment, slope_table, wilcoxon_power_table, write_table,
    Experiment, ExperimentConfig, OutputFormat, ResultTable, TableRow, TestSpec,
};
use crate::rank_tests::{
    ks_two_sample, null_distribution_with, Alternative, DecisionRule, NullMethod, NullOptions, RankTestConfig,
    RankTestProcedure, ReferenceSample, Scheme,
};
use crate::rng::RngSeed;
use crate::sampling::LehmannKind;
use crate::scores::{score_vector, ScoreFunction, ScoreMode, ScoreVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_REJECTED: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "distrank", version, about = "Rank tests on distances for the multivariate two-sample problem")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Significance level
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Master seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo replications
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Worker threads (default: DISTRANK_WORKERS, then all CPUs)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// randomized, simple, conditional, ks, hotelling or liu-singh
    #[arg(long, global = true)]
    scheme: Option<String>,
    /// wilcoxon, psi, savage, vdw or median; append -raw for raw rank sums in null-dist
    #[arg(long, global = true)]
    score: Option<String>,
    /// euclidean, mahalanobis-origin or mahalanobis-centered
    #[arg(long, global = true)]
    kernel: Option<String>,
    /// csv, json or pretty
    #[arg(long, global = true)]
    format: Option<String>,
    /// JSON or TOML configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one test on CSV data: two files, or one file with a `group` column
    Test {
        #[arg(required = true, num_args = 1..=2)]
        files: Vec<PathBuf>,
        #[arg(long, value_enum)]
        alternative: Option<AltArg>,
        #[arg(long, value_enum)]
        reference: Option<RefArg>,
        /// Randomize at the critical atom, or reject when p ≤ α
        #[arg(long, value_enum)]
        rule: Option<RuleArg>,
        /// Basis size of the conditional scheme
        #[arg(long)]
        basis_size: Option<usize>,
        /// Permutations for liu-singh
        #[arg(long, default_value_t = 999)]
        permutations: usize,
    },
    /// Run a Monte Carlo power experiment
    Power {
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        /// Comma-separated equal group sizes, e.g. 10,100
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Write the table here instead of standard output
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Analytic efficiency, power and slope tables
    Asymptotic {
        #[arg(long, value_enum, default_value_t = TableArg::Efficiencies)]
        table: TableArg,
        #[arg(long, value_enum, default_value_t = ConventionArg::Unscaled)]
        convention: ConventionArg,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
    },
    /// Hellinger sums and likelihood-ratio tails at Δ_N = Δ₀/√N
    Contiguity {
        #[arg(long, value_enum, default_value_t = FamilyArg::All)]
        family: FamilyArg,
        #[arg(long, default_value_t = 1.0)]
        delta0: f64,
        #[arg(long, default_value_t = 50)]
        m: usize,
        #[arg(long, default_value_t = 50)]
        n: usize,
    },
    /// Dump the null distribution of a linear rank statistic
    NullDist {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Score generation
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AltArg {
    Greater,
    TwoSided,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RefArg {
    First,
    Second,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RuleArg {
    Randomized,
    Nonrandomized,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PresetArg {
    Table2,
    Table3,
    Table4,
    Table5,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum TableArg {
    Efficiencies,
    WilcoxonPower,
    Slopes,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ConventionArg {
    Unscaled,
    Formula,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FamilyArg {
    All,
    WilcoxonType,
    PsiType,
    SavageType,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    Auto,
    Enumerate,
    Recursion,
    MonteCarlo,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Exact,
    Approximate,
}

enum Outcome {
    Done,
    Rejected,
}

/// Parses `argv` (program name first) and runs the command. Returns the exit code:
/// 0 success, 1 usage error, 2 runtime error, 3 hypothesis rejected by `test`.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{text}");
                EXIT_OK
            } else {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            };
        }
    };
    match dispatch(&cli, out) {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::Rejected) => EXIT_REJECTED,
        Err(e @ Error::InvalidArgument(_)) if is_usage(&e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

// Bad flag values that clap cannot check are usage errors.
fn is_usage(e: &Error) -> bool {
    matches!(e, Error::InvalidArgument(m) if m.starts_with("unknown "))
}

fn format_or(g: &Global, default: OutputFormat) -> Result<OutputFormat> {
    g.format.as_deref().map_or(Ok(default), str::parse)
}

fn emit(out: &mut dyn Write, table: &ResultTable, format: OutputFormat) -> Result<()> {
    let text = emit_table(table, format)?;
    out.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: "<stdout>".into(),
        source,
    })
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Test {
            files,
            alternative,
            reference,
            rule,
            basis_size,
            permutations,
        } => {
            let options = TestOptions {
                alternative: *alternative,
                reference: *reference,
                rule: *rule,
                basis_size: *basis_size,
                permutations: *permutations,
            };
            run_test(g, out, files, &options)
        }
        Command::Power { preset, sizes, output } => {
            let mut config = match (&g.config, preset) {
                (Some(path), _) => ExperimentConfig::load(path)?,
                (None, Some(p)) => ExperimentConfig::preset(match p {
                    PresetArg::Table2 => Experiment::Table2,
                    PresetArg::Table3 => Experiment::Table3,
                    PresetArg::Table4 => Experiment::Table4,
                    PresetArg::Table5 => Experiment::Table5,
                })?,
                (None, None) => return Err(Error::InvalidArgument("unknown experiment: pass --config or --preset".into())),
            };
            apply_overrides(&mut config, g, sizes.as_deref())?;
            let table = run_experiment(&config)?;
            let format = format_or(g, OutputFormat::PrettyText)?;
            match output {
                Some(path) => write_table(&table, format, path)?,
                None => emit(out, &table, format)?,
            }
            Ok(Outcome::Done)
        }
        Command::Asymptotic { table, convention, lambda } => {
            let alpha = g.alpha.unwrap_or(0.05);
            let t = match table {
                TableArg::Efficiencies => efficiency_table()?,
                TableArg::WilcoxonPower => {
                    let mut grid: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
                    grid.extend([2.0, 3.0]);
                    wilcoxon_power_table(&grid, alpha)?
                }
                TableArg::Slopes => {
                    let conv = match convention {
                        ConventionArg::Unscaled => SlopeConvention::Unscaled,
                        ConventionArg::Formula => SlopeConvention::Formula { lambda: *lambda },
                    };
                    slope_table(&[0.001, 0.01, 0.025, 0.05, 0.1], conv)?
                }
            };
            emit(out, &t, format_or(g, OutputFormat::PrettyText)?)?;
            Ok(Outcome::Done)
        }
        Command::Contiguity { family, delta0, m, n } => {
            let kinds: Vec<LehmannKind> = match family {
                FamilyArg::All => LehmannKind::ALL.to_vec(),
                FamilyArg::WilcoxonType => vec![LehmannKind::WilcoxonType],
                FamilyArg::PsiType => vec![LehmannKind::PsiType],
                FamilyArg::SavageType => vec![LehmannKind::SavageType],
            };
            let t = contiguity_table(&kinds, *delta0, &[(*m, *n)])?;
            emit(out, &t, format_or(g, OutputFormat::PrettyText)?)?;
            Ok(Outcome::Done)
        }
        Command::NullDist { m, n, method, mode } => {
            let spec = g.score.as_deref().unwrap_or("wilcoxon");
            let scores = match spec.strip_suffix("-raw") {
                Some("wilcoxon") => ScoreVector::raw_ranks(m + n),
                Some(other) => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown score '{other}-raw': only wilcoxon-raw is a raw rank sum"
                    )))
                }
                None => {
                    let f: ScoreFunction = spec.parse()?;
                    let mode = match mode {
                        ModeArg::Exact => ScoreMode::Exact,
                        ModeArg::Approximate => ScoreMode::Approximate,
                    };
                    score_vector(f, m + n, mode)?
                }
            };
            let options = NullOptions {
                method: match method {
                    MethodArg::Auto => NullMethod::Auto,
                    MethodArg::Enumerate => NullMethod::Enumerate,
                    MethodArg::Recursion => NullMethod::Recursion,
                    MethodArg::MonteCarlo => NullMethod::MonteCarlo,
                },
                monte_carlo_count: g.reps.unwrap_or(NullOptions::default().monte_carlo_count),
                ..NullOptions::default()
            };
            let d = null_distribution_with(*m, *n, &scores, &options, RngSeed::new(g.seed.unwrap_or(0), 0))?;
            let mut t = ResultTable::new(&format!("Null distribution, m={m}, n={n}, {:?}", d.mode()), &["statistic"]);
            for (s, p) in d.support().iter().zip(d.probabilities()) {
                t.rows.push(TableRow::value(vec![s.to_string()], *p));
            }
            emit(out, &t, format_or(g, OutputFormat::Csv)?)?;
            Ok(Outcome::Done)
        }
    }
}

fn apply_overrides(config: &mut ExperimentConfig, g: &Global, sizes: Option<&[usize]>) -> Result<()> {
    if let Some(a) = g.alpha {
        config.alpha = a;
    }
    if let Some(s) = g.seed {
        config.seed = s;
    }
    if let Some(r) = g.reps {
        config.replications = r;
    }
    if g.workers.is_some() {
        config.workers = g.workers;
    }
    if let Some(s) = sizes {
        *config = config.clone().with_sizes(s);
    }
    let score: Option<ScoreFunction> = g.score.as_deref().map(str::parse).transpose()?;
    let kernel: Option<DistanceKernel> = g.kernel.as_deref().map(str::parse).transpose()?;
    let scheme: Option<Scheme> = g.scheme.as_deref().map(str::parse).transpose()?;
    for t in &mut config.tests {
        if let TestSpec::Rank { scheme: s, config: c, .. } = t {
            if let Some(f) = score {
                c.score = f;
            }
            if let Some(k) = kernel {
                c.kernel = k;
            }
            if let Some(x) = scheme {
                *s = x;
            }
        }
    }
    config.validate()
}

fn load_groups(files: &[PathBuf]) -> Result<(MultivariateSample, MultivariateSample)> {
    match files {
        [one] => {
            let (sample, groups) = read_csv_path(one)?;
            let groups = groups.ok_or_else(|| {
                Error::InvalidArgument(format!("{}: single-file input needs a 'group' column", one.display()))
            })?;
            split_groups(&sample, &groups)
        }
        [a, b] => {
            let read = |p: &Path| -> Result<MultivariateSample> {
                let (s, groups) = read_csv_path(p)?;
                if groups.is_some() {
                    return Err(Error::InvalidArgument(format!(
                        "{}: a 'group' column is only allowed in single-file input",
                        p.display()
                    )));
                }
                Ok(s)
            };
            Ok((read(a)?, read(b)?))
        }
        _ => Err(Error::InvalidArgument("expected one or two input files".into())),
    }
}

fn load_rank_config(g: &Global) -> Result<RankTestConfig> {
    let Some(path) = &g.config else {
        return Ok(RankTestConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => toml::from_str(&text).map_err(|e| Error::Config(e.to_string())),
        _ => Ok(serde_json::from_str(&text)?),
    }
}

fn write_line(out: &mut dyn Write, text: &str) -> Result<()> {
    writeln!(out, "{text}").map_err(|source| Error::Io {
        path: "<stdout>".into(),
        source,
    })
}

struct TestOptions {
    alternative: Option<AltArg>,
    reference: Option<RefArg>,
    rule: Option<RuleArg>,
    basis_size: Option<usize>,
    permutations: usize,
}

fn run_test(g: &Global, out: &mut dyn Write, files: &[PathBuf], opts: &TestOptions) -> Result<Outcome> {
    let (x, y) = load_groups(files)?;
    let mut config = load_rank_config(g)?;
    if let Some(a) = g.alpha {
        config.alpha = a;
    }
    let alpha = config.alpha;
    let seed = RngSeed::new(g.seed.unwrap_or(0), 0);
    let scheme = g.scheme.as_deref().unwrap_or("randomized").to_ascii_lowercase();
    let json = !matches!(format_or(g, OutputFormat::Json)?, OutputFormat::PrettyText);
    let (reject, text) = match scheme.as_str() {
        "hotelling" => {
            let r = hotelling_test(&x, &y, alpha)?;
            let text = if json {
                serde_json::to_string_pretty(&r)?
            } else {
                format!("T2 = {:.6}\nF = {:.6} on ({}, {}) df\np-value = {:.6}\nreject = {}", r.t2, r.f_statistic, r.df1, r.df2, r.p_value, r.reject)
            };
            (r.reject, text)
        }
        "liu-singh" | "liusingh" => {
            let cal = DepthCalibration::Permutation {
                count: g.reps.unwrap_or(opts.permutations),
                seed,
            };
            let r = liu_singh_test(&x, &y, alpha, cal)?;
            let text = if json {
                serde_json::to_string_pretty(&r)?
            } else {
                format!("Q = {:.6}\np-value = {:.6}\nreject = {}", r.q, r.p_value, r.reject)
            };
            (r.reject, text)
        }
        other => {
            let scheme: Scheme = other.parse()?;
            if let Some(s) = &g.score {
                config.score = s.parse()?;
            }
            if let Some(k) = &g.kernel {
                config.kernel = k.parse()?;
            }
            if let Some(a) = opts.alternative {
                config.alternative = match a {
                    AltArg::Greater => Alternative::Greater,
                    AltArg::TwoSided => Alternative::TwoSided,
                };
            }
            if let Some(r) = opts.rule {
                config.rule = match r {
                    RuleArg::Randomized => DecisionRule::Randomized,
                    RuleArg::Nonrandomized => DecisionRule::Nonrandomized,
                };
            }
            if let Some(r) = opts.reference {
                config.reference = match r {
                    RefArg::First => ReferenceSample::First,
                    RefArg::Second => ReferenceSample::Second,
                };
            }
            if opts.basis_size.is_some() {
                config.basis_size = opts.basis_size;
            }
            let result = if scheme == Scheme::KolmogorovSmirnov {
                if x.dim() != 1 {
                    return Err(Error::InvalidArgument("the ks scheme needs univariate data".into()));
                }
                let col = |s: &MultivariateSample| s.matrix().column(0).iter().copied().collect::<Vec<f64>>();
                ks_two_sample(&col(&x), &col(&y), alpha)?
            } else {
                let pooled = PooledSample::new(&x, &y)?;
                let proc = RankTestProcedure::new(scheme, config.clone(), x.len(), y.len(), x.dim(), seed)?;
                proc.run(&pooled, seed)?
            };
            let u: f64 = seed.derive(9).rng().random();
            let reject = result.realize(u);
            let text = if json {
                result.to_json()
            } else {
                let mut s = format!(
                    "scheme = {}\nstatistic = {:.6}\nC_alpha = {:.6}\ngamma = {:.6}\np-value = {:.6}",
                    result.scheme.label(),
                    result.statistic,
                    result.c_alpha,
                    result.gamma,
                    result.p_value
                );
                if let Some(mp) = result.mixture_p_value {
                    s += &format!("\nmixture p-value = {mp:.6}");
                }
                s + &format!("\nreject = {reject}")
            };
            (reject, text)
        }
    };
    write_line(out, &text)?;
    Ok(if reject { Outcome::Rejected } else { Outcome::Done })
}
