//! Monte Carlo power from a TOML experiment, with the table in every output
//! format. Results do not depend on the worker count.

use distrank::harness::{emit_table, run_experiment, ExperimentConfig, OutputFormat};

const CONFIG: &str = r#"
experiment = "custom"
alpha = 0.05
replications = 4000
seed = 17
sizes = [{ m = 20, n = 20 }, { m = 50, n = 50 }]

[design]
type = "lehmann"
kind = "savage-type"
delta0 = [0.0, 1.0, 3.0]

[[tests]]
type = "rank"
label = "Savage"
scheme = "simple"
config = { score = "savage", mixture_p_value = false }

[[tests]]
type = "rank"
label = "Wilcoxon"
scheme = "simple"
config = { score = "wilcoxon", mixture_p_value = false }

[[tests]]
type = "ks"
label = "KS"
"#;

fn main() -> distrank::error::Result<()> {
    let config = ExperimentConfig::from_toml_str(CONFIG)?;
    let one = run_experiment(&config.clone().with_workers(Some(1)))?;
    let four = run_experiment(&config.with_workers(Some(4)))?;
    print!("{}", emit_table(&one, OutputFormat::PrettyText)?);
    println!();
    print!("{}", emit_table(&one, OutputFormat::Csv)?);
    println!(
        "\nidentical CSV with 1 and 4 workers: {}",
        emit_table(&one, OutputFormat::Csv)? == emit_table(&four, OutputFormat::Csv)?
    );
    Ok(())
}
