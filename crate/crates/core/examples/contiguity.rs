//! Numerical contiguity check: Hellinger sums against the analytic bounds and
//! the likelihood-ratio tail at the local parameter Δ₀/√N.

use distrank::asymptotics::contiguity_check;
use distrank::sampling::LehmannKind;

fn main() -> distrank::error::Result<()> {
    for kind in LehmannKind::ALL {
        for total in [100, 1_000, 10_000] {
            let r = contiguity_check(kind, 1.0, total / 2, total / 2)?;
            let tail_after = r.tail_grid.iter().find(|(c, _)| *c > r.max_ratio).map_or(0.0, |t| t.1);
            println!(
                "{:<14} N={total:<6} delta_N={:.4}  sum H^2={:.3e}  bound={:.3e}  tail past 1+delta_N={tail_after}  pass={}",
                kind.label(),
                r.delta_n,
                r.sum_h2,
                r.bound,
                r.pass
            );
        }
    }
    Ok(())
}
