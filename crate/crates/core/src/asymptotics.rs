//! Local asymptotic powers, relative efficiencies, power slopes near the
//! hypothesis, and a numerical contiguity checker for the Lehmann families.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit_open, Error, Result};
use crate::numeric::{norm_cdf, norm_pdf, norm_quantile, norm_sf, Quadrature};
use crate::sampling::{LehmannAlternative, LehmannKind, Which};
use crate::scores::ScoreFunction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSetting {
    /// Limit of `m/N`.
    pub lambda: f64,
    /// Local parameter, `Δ_N = Δ₀ / √N`.
    pub delta0: f64,
    pub alpha: f64,
}

impl AsymptoticSetting {
    pub fn new(lambda: f64, delta0: f64, alpha: f64) -> Result<Self> {
        check_unit_open("lambda", lambda)?;
        check_unit_open("alpha", alpha)?;
        if !(delta0 >= 0.0 && delta0.is_finite()) {
            return Err(Error::Domain {
                name: "delta0",
                value: delta0,
                domain: "[0, ∞)",
            });
        }
        Ok(Self { lambda, delta0, alpha })
    }
}

/// A score function paired with the alternative family it is evaluated under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScoreAltPair {
    pub score: ScoreFunction,
    pub alternative: LehmannKind,
}

impl ScoreAltPair {
    pub fn new(score: ScoreFunction, alternative: LehmannKind) -> Self {
        Self { score, alternative }
    }
}

/// The score generating function of the locally most powerful rank test for a family.
pub fn optimal_score(kind: LehmannKind) -> ScoreFunction {
    match kind {
        LehmannKind::WilcoxonType => ScoreFunction::Wilcoxon,
        LehmannKind::PsiType => ScoreFunction::Psi,
        LehmannKind::SavageType => ScoreFunction::Savage,
    }
}

/// `φ*(u)`: derivative in Δ at Δ = 0 of the log density contrast between the samples.
pub fn phi_star(kind: LehmannKind) -> fn(f64) -> f64 {
    match kind {
        LehmannKind::WilcoxonType => |u| 2.0 * u - 1.0,
        LehmannKind::SavageType => |u| 1.0 + u.ln(),
        LehmannKind::PsiType => |u| u.ln() - (-u).ln_1p(),
    }
}

fn quadrature() -> Quadrature {
    Quadrature::with_tolerance(1e-12)
}

/// `(∫ φ φ*, ∫ φ²)` on the unit interval.
pub fn score_integrals(pair: ScoreAltPair) -> Result<(f64, f64)> {
    let q = quadrature();
    let star = phi_star(pair.alternative);
    let f = pair.score;
    let cross = q.unit_interval(|u| f.phi(u) * star(u))?;
    Ok((cross, f.second_moment()))
}

/// `μ = λ(1−λ)∫φφ*` and `σ = √(λ(1−λ)∫φ²)`.
pub fn asymptotic_mu_sigma(pair: ScoreAltPair, lambda: f64) -> Result<(f64, f64)> {
    check_unit_open("lambda", lambda)?;
    let (cross, square) = score_integrals(pair)?;
    let l = lambda * (1.0 - lambda);
    Ok((l * cross, (l * square).sqrt()))
}

/// `1 − Φ(Φ⁻¹(1−α) − μΔ₀/σ)`.
pub fn local_power(pair: ScoreAltPair, setting: &AsymptoticSetting) -> Result<f64> {
    let (mu, sigma) = asymptotic_mu_sigma(pair, setting.lambda)?;
    Ok(norm_sf(norm_quantile(1.0 - setting.alpha) - mu * setting.delta0 / sigma))
}

/// `((μ₁/σ₁) / (μ₂/σ₂))²` for two scores under the same family.
pub fn relative_efficiency(first: ScoreAltPair, second: ScoreAltPair, lambda: f64) -> Result<f64> {
    if first.alternative != second.alternative {
        return Err(Error::InvalidArgument(
            "relative efficiency compares two scores under the same alternative".into(),
        ));
    }
    let (m1, s1) = asymptotic_mu_sigma(first, lambda)?;
    let (m2, s2) = asymptotic_mu_sigma(second, lambda)?;
    if m2 == 0.0 {
        return Err(Error::InvalidArgument("reference test has zero asymptotic drift".into()));
    }
    Ok(((m1 / s1) / (m2 / s2)).powi(2))
}

/// `1 − Φ(Φ⁻¹(1−α) − Δ₀ √(λ(1−λ)/3))`.
pub fn wilcoxon_power_closed(setting: &AsymptoticSetting) -> f64 {
    let l = setting.lambda * (1.0 - setting.lambda);
    norm_sf(norm_quantile(1.0 - setting.alpha) - setting.delta0 * (l / 3.0).sqrt())
}

/// Normalisation of the slopes of the power functions at Δ₀ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "convention")]
pub enum SlopeConvention {
    /// `λ(1−λ) = 1` and the Kolmogorov–Smirnov slope `2α ∫(2u−1)ψ(α,u) du`,
    /// with both scale factors dropped.
    Unscaled,
    /// Slopes of the local power expansions at the given λ; the
    /// Kolmogorov–Smirnov slope carries the factor `√(−½ ln α)`.
    Formula { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSlopes {
    pub alpha: f64,
    pub ks: f64,
    pub wilcoxon: f64,
    /// `wilcoxon / ks`
    pub ratio: f64,
}

/// `ψ(α, u) = 2Φ((2u−1)√(−½ ln α) / √(u(1−u))) − 1`
pub fn psi_alpha(alpha: f64, u: f64) -> f64 {
    let c = (-0.5 * alpha.ln()).sqrt();
    2.0 * norm_cdf((2.0 * u - 1.0) * c / (u * (1.0 - u)).sqrt()) - 1.0
}

/// Slopes of the Kolmogorov–Smirnov and Wilcoxon local power curves at the hypothesis.
pub fn power_slopes(alpha: f64, convention: SlopeConvention) -> Result<PowerSlopes> {
    check_unit_open("alpha", alpha)?;
    let integral = quadrature().unit_interval(|u| (2.0 * u - 1.0) * psi_alpha(alpha, u))?;
    let density = norm_pdf(norm_quantile(1.0 - alpha));
    let (ks, wilcoxon) = match convention {
        SlopeConvention::Unscaled => (2.0 * alpha * integral, density / 3f64.sqrt()),
        SlopeConvention::Formula { lambda } => {
            check_unit_open("lambda", lambda)?;
            let l = (lambda * (1.0 - lambda)).sqrt();
            let c = (-0.5 * alpha.ln()).sqrt();
            (2.0 * alpha * c * integral * l, density * l / 3f64.sqrt())
        }
    };
    Ok(PowerSlopes {
        alpha,
        ks,
        wilcoxon,
        ratio: wilcoxon / ks,
    })
}

/// Squared Hellinger distance `∫₀¹ (√g − 1)² du` between one sample's
/// uniform-scale density `g` under parameter `delta` and the uniform law.
pub fn hellinger_sq(kind: LehmannKind, which: Which, delta: f64) -> Result<f64> {
    let alt = LehmannAlternative::new(kind, delta)?;
    if delta == 0.0 {
        return Ok(0.0);
    }
    let q = Quadrature::with_tolerance(1e-15);
    // (√g − 1)² = (g − 1)² / (√g + 1)², which keeps full precision for small δ.
    let v = q.unit_interval(|u| {
        let g = alt.density(which, u);
        let r = g.sqrt() + 1.0;
        (g - 1.0) * (g - 1.0) / (r * r)
    })?;
    Ok(v)
}

/// Outcome of the numerical contiguity check at `Δ_N = Δ₀/√N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContiguityReport {
    pub kind: LehmannKind,
    pub delta0: f64,
    pub m: usize,
    pub n: usize,
    pub delta_n: f64,
    /// `Σ_k H²(P_Nk, Q_Nk)`
    pub sum_h2: f64,
    pub bound: f64,
    /// Largest one-observation density ratio, `1 + Δ_N` for every family.
    pub max_ratio: f64,
    /// `(c, Q{q/p ≥ c})` on a grid reaching past `max_ratio`.
    pub tail_grid: Vec<(f64, f64)>,
    pub pass: bool,
}

impl ContiguityReport {
    /// `Q{q/p ≥ c}` for a single observation of the second sample.
    pub fn tail_mass(&self, c: f64) -> f64 {
        tail_mass(self.kind, self.delta_n, c)
    }
}

/// Mass under the second-sample alternative of `{u : g(u) ≥ c}`.
pub fn tail_mass(kind: LehmannKind, delta: f64, c: f64) -> f64 {
    if c > 1.0 + delta {
        return 0.0;
    }
    if delta == 0.0 {
        return 1.0;
    }
    match kind {
        LehmannKind::WilcoxonType => {
            // (1−δ) + 2δu ≥ c
            let u = ((c - 1.0 + delta) / (2.0 * delta)).clamp(0.0, 1.0);
            if u >= 1.0 {
                0.0
            } else {
                1.0 - ((1.0 - delta) * u + delta * u * u)
            }
        }
        LehmannKind::PsiType | LehmannKind::SavageType => {
            // (1+δ)u^δ ≥ c
            if c <= 0.0 {
                return 1.0;
            }
            let u = (c / (1.0 + delta)).powf(1.0 / delta).min(1.0);
            if u >= 1.0 {
                0.0
            } else {
                1.0 - u.powf(1.0 + delta)
            }
        }
    }
}

/// Analytic upper bound on `Σ_k H²` for the family.
pub fn contiguity_bound(kind: LehmannKind, delta_n: f64, m: usize, n: usize) -> f64 {
    let (mf, nf) = (m as f64, n as f64);
    match kind {
        LehmannKind::WilcoxonType => nf * delta_n * delta_n / 3.0,
        LehmannKind::PsiType => (mf + nf) * delta_n * delta_n / (1.0 + 2.0 * delta_n),
        LehmannKind::SavageType => 7.0 * nf * delta_n * delta_n,
    }
}

pub fn contiguity_check(kind: LehmannKind, delta0: f64, m: usize, n: usize) -> Result<ContiguityReport> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("group sizes must be positive, got m={m}, n={n}")));
    }
    let total = (m + n) as f64;
    let delta_n = delta0 / total.sqrt();
    let first = hellinger_sq(kind, Which::First, delta_n)?;
    let second = hellinger_sq(kind, Which::Second, delta_n)?;
    let sum_h2 = m as f64 * first + n as f64 * second;
    let bound = contiguity_bound(kind, delta_n, m, n);
    let max_ratio = 1.0 + delta_n;
    let tail_grid: Vec<(f64, f64)> = (0..=40)
        .map(|k| {
            let c = 1.0 + 2.0 * delta_n * k as f64 / 40.0 + if k == 20 { 1e-12 } else { 0.0 };
            (c, tail_mass(kind, delta_n, c))
        })
        .collect();
    let tail_ok = tail_grid.iter().all(|&(c, mass)| c <= max_ratio || mass == 0.0);
    // quadrature error allowance
    let pass = sum_h2 <= bound + 1e-12 * total && tail_ok;
    Ok(ContiguityReport {
        kind,
        delta0,
        m,
        n,
        delta_n,
        sum_h2,
        bound,
        max_ratio,
        tail_grid,
        pass,
    })
}

/// Relative efficiencies of the five tests (columns, in [`ScoreFunction::ALL`]
/// order) against the locally most powerful test of each family (rows).
pub fn efficiency_table() -> Result<Vec<(LehmannKind, Vec<f64>)>> {
    LehmannKind::ALL
        .iter()
        .map(|&kind| {
            let best = ScoreAltPair::new(optimal_score(kind), kind);
            let row = ScoreFunction::ALL
                .iter()
                .map(|&f| relative_efficiency(ScoreAltPair::new(f, kind), best, 0.5))
                .collect::<Result<Vec<f64>>>()?;
            Ok((kind, row))
        })
        .collect()
}
