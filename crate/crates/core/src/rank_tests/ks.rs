use serde::{Deserialize, Serialize};

use crate::error::{check_unit_open, Error, Result};

use super::schemes::{RankTestResult, Scheme, SeedTrail};

/// Largest `m·n` for which the exact lattice-path p-value is computed.
pub const KS_EXACT_CELLS: usize = 10_000_000;

/// One-sided two-sample statistic `D⁺ = sup_x (F̂_m(x) − Ĝ_n(x))`, large when
/// the second sample is stochastically larger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsStatistic {
    pub m: usize,
    pub n: usize,
    /// `max (i·n − j·m)` over the breakpoints, so `D⁺ = lattice / (m·n)`.
    pub lattice: i64,
    pub d_plus: f64,
    /// `√(mn/N) · D⁺`
    pub scaled: f64,
}

impl KsStatistic {
    pub fn compute(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::InvalidArgument("both samples need at least one value".into()));
        }
        let mut pooled: Vec<(f64, bool)> = x.iter().map(|&v| (v, false)).chain(y.iter().map(|&v| (v, true))).collect();
        if pooled.iter().any(|p| p.0.is_nan()) {
            return Err(Error::InvalidArgument("samples contain NaN".into()));
        }
        pooled.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self::from_sorted(&pooled, x.len(), y.len()))
    }

    /// From pooled values where the first `m` belong to the first sample.
    pub fn from_pooled(values: &[f64], m: usize) -> Result<Self> {
        if m == 0 || m >= values.len() {
            return Err(Error::InvalidArgument(format!("first group size {m} must lie in 1..{}", values.len())));
        }
        Self::compute(&values[..m], &values[m..])
    }

    fn from_sorted(pooled: &[(f64, bool)], m: usize, n: usize) -> Self {
        let (mut i, mut j) = (0i64, 0i64);
        let mut best = 0i64;
        let mut k = 0;
        while k < pooled.len() {
            let v = pooled[k].0;
            while k < pooled.len() && pooled[k].0 == v {
                if pooled[k].1 {
                    j += 1;
                } else {
                    i += 1;
                }
                k += 1;
            }
            best = best.max(i * n as i64 - j * m as i64);
        }
        let (mf, nf) = (m as f64, n as f64);
        let d_plus = best as f64 / (mf * nf);
        Self {
            m,
            n,
            lattice: best,
            d_plus,
            scaled: (mf * nf / (mf + nf)).sqrt() * d_plus,
        }
    }
}

/// `P(D⁺ ≥ lattice / (mn))` under random assignment of the pooled order.
pub fn ks_exact_p_value(m: usize, n: usize, lattice: i64) -> f64 {
    if lattice <= 0 {
        return 1.0;
    }
    let (mi, ni) = (m as i64, n as i64);
    // prob[j] over the current i: probability of reaching (i, j) with i·n − j·m < lattice throughout.
    let mut prob = vec![0.0f64; n + 1];
    let mut next = vec![0.0f64; n + 1];
    prob[0] = 1.0;
    for j in 1..=n {
        let rest = (m + n - (j - 1)) as f64;
        prob[j] = prob[j - 1] * (n - (j - 1)) as f64 / rest;
    }
    for i in 1..=m {
        next.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..=n {
            if i as i64 * ni - j as i64 * mi >= lattice {
                continue;
            }
            // arrive from (i−1, j) by an x step or from (i, j−1) by a y step
            let from_left = prob[j] * (m - (i - 1)) as f64 / (m + n - (i - 1) - j) as f64;
            let from_below = if j > 0 {
                next[j - 1] * (n - (j - 1)) as f64 / (m + n - i - (j - 1)) as f64
            } else {
                0.0
            };
            next[j] = from_left + from_below;
        }
        std::mem::swap(&mut prob, &mut next);
    }
    (1.0 - prob[n]).clamp(0.0, 1.0)
}

/// One-sided two-sample Kolmogorov–Smirnov test with the asymptotic
/// critical value `√(−½ ln α)`; the exact p-value is reported when `m·n` is
/// at most [`KS_EXACT_CELLS`].
pub fn ks_two_sample(x: &[f64], y: &[f64], alpha: f64) -> Result<RankTestResult> {
    check_unit_open("alpha", alpha)?;
    let s = KsStatistic::compute(x, y)?;
    Ok(ks_result(&s, alpha))
}

pub(crate) fn ks_critical(alpha: f64) -> f64 {
    (-0.5 * alpha.ln()).sqrt()
}

pub(crate) fn ks_result(s: &KsStatistic, alpha: f64) -> RankTestResult {
    let c = ks_critical(alpha);
    let p_value = if s.m * s.n <= KS_EXACT_CELLS {
        ks_exact_p_value(s.m, s.n, s.lattice)
    } else {
        (-2.0 * s.scaled * s.scaled).exp().min(1.0)
    };
    RankTestResult {
        scheme: Scheme::KolmogorovSmirnov,
        statistic: s.scaled,
        c_alpha: c,
        gamma: 0.0,
        decision: if s.scaled >= c { 1.0 } else { 0.0 },
        p_value,
        mixture_p_value: None,
        selected: None,
        null_mode: None,
        alpha,
        seeds: SeedTrail::default(),
    }
}
