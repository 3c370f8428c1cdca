//! A small version of the bivariate normal comparison: Hotelling's T² against
//! the interpoint-distance Wilcoxon test under a location and a scale change.

use distrank::harness::{emit_table, run_experiment, table4, OutputFormat};

fn main() -> distrank::error::Result<()> {
    let config = table4()
        .with_sizes(&[10, 50])
        .with_replications(2_000)
        .retain_rows(|label| label.starts_with("mu=(0.5,0.5)") || label.ends_with("diag(0.2,0.2)"));
    let table = run_experiment(&config)?;
    print!("{}", emit_table(&table, OutputFormat::PrettyText)?);
    Ok(())
}
