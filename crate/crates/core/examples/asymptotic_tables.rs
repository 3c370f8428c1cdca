//! Relative efficiencies, asymptotic Wilcoxon power and power-curve slopes.

use distrank::asymptotics::{local_power, AsymptoticSetting, ScoreAltPair, SlopeConvention};
use distrank::harness::{efficiency_table, emit_table, slope_table, wilcoxon_power_table, OutputFormat};
use distrank::sampling::LehmannKind;
use distrank::scores::ScoreFunction;

fn main() -> distrank::error::Result<()> {
    print!("{}", emit_table(&efficiency_table()?, OutputFormat::PrettyText)?);
    println!();
    print!("{}", emit_table(&wilcoxon_power_table(&[0.0, 0.5, 1.0, 2.0, 3.0], 0.05)?, OutputFormat::PrettyText)?);
    println!();
    let alphas = [0.001, 0.01, 0.025, 0.05, 0.1];
    print!("{}", emit_table(&slope_table(&alphas, SlopeConvention::Unscaled)?, OutputFormat::PrettyText)?);
    print!("{}", emit_table(&slope_table(&alphas, SlopeConvention::Formula { lambda: 0.5 })?, OutputFormat::Csv)?);

    println!("\nlocal power under the Savage-type alternative, delta0 = 2, alpha = 0.05:");
    let setting = AsymptoticSetting::new(0.5, 2.0, 0.05)?;
    for f in ScoreFunction::ALL {
        let p = local_power(ScoreAltPair::new(f, LehmannKind::SavageType), &setting)?;
        println!("  {:<16} {p:.4}", f.label());
    }
    Ok(())
}
