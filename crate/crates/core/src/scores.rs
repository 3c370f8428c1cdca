//! Score generating functions and the score vectors `a_N(1..N)` they induce.

use serde::{Deserialize, Serialize};

use crate::error::{check_unit_open, Error, Result};
use crate::numeric::{ln_binomial, norm_cdf, norm_pdf, norm_quantile, norm_sf, Quadrature};

/// The score generating functions supported by the rank tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreFunction {
    /// `2u − 1`
    Wilcoxon,
    /// `ln u − ln(1 − u)`
    Psi,
    /// `1 + ln u`
    Savage,
    /// `Φ⁻¹(u)`
    VanDerWaerden,
    /// `sign(u − ½)`
    Median,
}

impl ScoreFunction {
    pub const ALL: [ScoreFunction; 5] = [
        Self::Wilcoxon,
        Self::Psi,
        Self::Savage,
        Self::VanDerWaerden,
        Self::Median,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Self::Wilcoxon => "wilcoxon",
            Self::Psi => "psi",
            Self::Savage => "savage",
            Self::VanDerWaerden => "van-der-waerden",
            Self::Median => "median",
        }
    }

    /// φ(u) without domain checks; infinite at the endpoints for the unbounded generators.
    pub fn phi(self, u: f64) -> f64 {
        match self {
            Self::Wilcoxon => 2.0 * u - 1.0,
            Self::Psi => u.ln() - (-u).ln_1p(),
            Self::Savage => 1.0 + u.ln(),
            Self::VanDerWaerden => norm_quantile(u),
            Self::Median => {
                if u > 0.5 {
                    1.0
                } else if u < 0.5 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `∫₀¹ φ²(u) du`.
    pub fn second_moment(self) -> f64 {
        match self {
            Self::Wilcoxon => 1.0 / 3.0,
            Self::Psi => std::f64::consts::PI.powi(2) / 3.0,
            Self::Savage | Self::VanDerWaerden | Self::Median => 1.0,
        }
    }
}

impl std::str::FromStr for ScoreFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "wilcoxon" | "w" => Ok(Self::Wilcoxon),
            "psi" | "logistic" => Ok(Self::Psi),
            "savage" | "s" => Ok(Self::Savage),
            "van-der-waerden" | "vanderwaerden" | "vdw" | "normal" => Ok(Self::VanDerWaerden),
            "median" | "m" => Ok(Self::Median),
            other => Err(Error::InvalidArgument(format!("unknown score function '{other}'"))),
        }
    }
}

/// Evaluates φ(u) for `u ∈ (0, 1)`.
pub fn evaluate_phi(f: ScoreFunction, u: f64) -> Result<f64> {
    check_unit_open("u", u)?;
    Ok(f.phi(u))
}

/// How a score vector was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreMode {
    /// `a_N(k) = E φ(U_{N:k})`
    Exact,
    /// `a_N(k) = φ(k / (N + 1))`
    Approximate,
    /// `a(k) = k`, and statistics are plain rank sums without the `N^{-1/2}` factor.
    Raw,
}

/// Scores `a_N(1), …, a_N(N)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    values: Vec<f64>,
    mode: ScoreMode,
    function: Option<ScoreFunction>,
}

impl ScoreVector {
    /// Rank-sum scores `a(k) = k`.
    pub fn raw_ranks(n: usize) -> Self {
        Self {
            values: (1..=n).map(|k| k as f64).collect(),
            mode: ScoreMode::Raw,
            function: None,
        }
    }

    /// Wraps caller-supplied scores; they must be nondecreasing.
    pub fn from_values(values: Vec<f64>, mode: ScoreMode) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidArgument("score vectors need N ≥ 2".into()));
        }
        if values.windows(2).any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt())) {
            return Err(Error::InvalidArgument("scores must be nondecreasing".into()));
        }
        Ok(Self {
            values,
            mode,
            function: None,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `a_N(k)` for a 1-based rank `k`.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn mode(&self) -> ScoreMode {
        self.mode
    }

    pub fn function(&self) -> Option<ScoreFunction> {
        self.function
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Factor in front of the score sum: `N^{-1/2}`, or 1 for raw rank sums.
    pub fn scale(&self) -> f64 {
        match self.mode {
            ScoreMode::Raw => 1.0,
            _ => 1.0 / (self.len() as f64).sqrt(),
        }
    }

    /// `(a, b)` when the scores are `a + b·k` up to rounding.
    pub fn affine_in_rank(&self) -> Option<(f64, f64)> {
        let b = self.values[1] - self.values[0];
        let a = self.values[0] - b;
        let spread = self.values.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
        let tol = 1e-12 * spread;
        self.values
            .iter()
            .enumerate()
            .all(|(i, v)| (a + b * (i + 1) as f64 - v).abs() <= tol)
            .then_some((a, b))
    }
}

/// Builds the score vector of length `n` for `f`.
pub fn score_vector(f: ScoreFunction, n: usize, mode: ScoreMode) -> Result<ScoreVector> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("score vectors need N ≥ 2, got {n}")));
    }
    let values = match mode {
        ScoreMode::Raw => return Ok(ScoreVector::raw_ranks(n)),
        ScoreMode::Approximate => (1..=n).map(|k| f.phi(k as f64 / (n as f64 + 1.0))).collect(),
        ScoreMode::Exact => match f {
            ScoreFunction::Wilcoxon => (1..=n).map(|k| 2.0 * k as f64 / (n as f64 + 1.0) - 1.0).collect(),
            ScoreFunction::Psi => psi_values(n),
            ScoreFunction::Savage => savage_values(n),
            ScoreFunction::Median => median_values(n),
            ScoreFunction::VanDerWaerden => normal_values(n)?,
        },
    };
    Ok(ScoreVector {
        values,
        mode,
        function: Some(f),
    })
}

/// Exact Psi scores `a_N(i) = Σ_{j<i} 1/(N−j) − Σ_{j≤N−i} 1/(N−j)`.
pub fn psi_scores(n: usize) -> Result<ScoreVector> {
    score_vector(ScoreFunction::Psi, n, ScoreMode::Exact)
}

fn psi_values(n: usize) -> Vec<f64> {
    // tail[i] = Σ_{j=0}^{i−1} 1/(N−j)
    let mut tail = vec![0.0; n + 1];
    for i in 1..=n {
        tail[i] = tail[i - 1] + 1.0 / (n - i + 1) as f64;
    }
    let mut v: Vec<f64> = (1..=n).map(|i| tail[i] - tail[n - i + 1]).collect();
    antisymmetrize(&mut v);
    v
}

fn savage_values(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    let mut acc = 0.0;
    for k in (1..=n).rev() {
        acc += 1.0 / k as f64;
        v[k - 1] = 1.0 - acc;
    }
    v
}

fn median_values(n: usize) -> Vec<f64> {
    // E sign(U_{N:k} − ½) = 1 − 2 P(Bin(N, ½) ≥ k)
    let ln_half = -(n as f64) * std::f64::consts::LN_2;
    let pmf: Vec<f64> = (0..=n as u64).map(|j| (ln_binomial(n as u64, j) + ln_half).exp()).collect();
    let mut upper = vec![0.0; n + 2];
    for j in (0..=n).rev() {
        upper[j] = upper[j + 1] + pmf[j];
    }
    let mut v: Vec<f64> = (1..=n).map(|k| 1.0 - 2.0 * upper[k]).collect();
    antisymmetrize(&mut v);
    v
}

fn normal_values(n: usize) -> Result<Vec<f64>> {
    let q = Quadrature::with_tolerance(1e-13);
    let breaks: Vec<f64> = (-10..=10).map(f64::from).collect();
    let mut v = vec![0.0; n];
    for k in 1..=n.div_ceil(2) {
        if 2 * k == n + 1 {
            continue;
        }
        let ln_c = ln_binomial(n as u64, k as u64) + (k as f64).ln();
        let (a, b) = ((k - 1) as f64, (n - k) as f64);
        let density = |z: f64| {
            let ln = ln_c + a * norm_cdf(z).ln() + b * norm_sf(z).ln();
            (ln.exp()) * norm_pdf(z)
        };
        let mean = q.integrate_with_breaks(|z| z * density(z), &breaks)?.value;
        v[k - 1] = mean;
        v[n - k] = -mean;
    }
    Ok(v)
}

/// Exact scores `E h(U_{N:k})` for an arbitrary integrable generator, by quadrature
/// against the Beta(k, N−k+1) density.
pub fn exact_scores_by_quadrature<F: Fn(f64) -> f64>(phi: F, n: usize) -> Result<ScoreVector> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("score vectors need N ≥ 2, got {n}")));
    }
    let q = Quadrature::with_tolerance(1e-12);
    let mut values = Vec::with_capacity(n);
    for k in 1..=n {
        let ln_c = ln_binomial(n as u64, k as u64) + (k as f64).ln();
        let (a, b) = ((k - 1) as f64, (n - k) as f64);
        let f = |u: f64| {
            if u <= 0.0 || u >= 1.0 {
                return 0.0;
            }
            phi(u) * (ln_c + a * u.ln() + b * (-u).ln_1p()).exp()
        };
        values.push(q.integrate_with_breaks(f, &[0.0, 0.25, 0.5, 0.75, 1.0])?.value);
    }
    Ok(ScoreVector {
        values,
        mode: ScoreMode::Exact,
        function: None,
    })
}

fn antisymmetrize(v: &mut [f64]) {
    let n = v.len();
    for i in 0..n / 2 {
        let a = 0.5 * (v[n - 1 - i] - v[i]);
        v[i] = -a;
        v[n - 1 - i] = a;
    }
    if n % 2 == 1 {
        v[n / 2] = 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn phi_examples() {
        assert_eq!(evaluate_phi(ScoreFunction::Wilcoxon, 0.5).unwrap(), 0.0);
        assert!(evaluate_phi(ScoreFunction::Savage, (-1.0f64).exp()).unwrap().abs() < 1e-15);
        assert_eq!(evaluate_phi(ScoreFunction::Psi, 0.5).unwrap(), 0.0);
        assert!(evaluate_phi(ScoreFunction::Psi, 0.0).is_err());
        assert!(evaluate_phi(ScoreFunction::Median, 1.0).is_err());
    }

    #[test]
    fn small_vectors() {
        for mode in [ScoreMode::Exact, ScoreMode::Approximate] {
            let w = score_vector(ScoreFunction::Wilcoxon, 3, mode).unwrap();
            assert!(close(w.values(), &[-0.5, 0.0, 0.5], 1e-15));
        }
        assert!(close(psi_scores(2).unwrap().values(), &[-1.0, 1.0], 1e-15));
        assert!(close(psi_scores(3).unwrap().values(), &[-1.5, 0.0, 1.5], 1e-15));
        let s = score_vector(ScoreFunction::Savage, 2, ScoreMode::Exact).unwrap();
        assert!(close(s.values(), &[-0.5, 0.5], 1e-15));
        assert!(score_vector(ScoreFunction::Savage, 1, ScoreMode::Exact).is_err());
    }

    #[test]
    fn structural_properties() {
        let p = psi_scores(50).unwrap();
        for i in 1..=50 {
            assert_eq!(p.get(i), -p.get(51 - i));
        }
        for n in [2, 7, 40, 101] {
            let s = score_vector(ScoreFunction::Savage, n, ScoreMode::Exact).unwrap();
            assert!(s.sum().abs() < 1e-12, "savage sum {}", s.sum());
            for f in ScoreFunction::ALL {
                for mode in [ScoreMode::Exact, ScoreMode::Approximate] {
                    let v = score_vector(f, n, mode).unwrap();
                    assert!(v.values().windows(2).all(|w| w[0] <= w[1]), "{f:?} {mode:?} {n}");
                }
            }
        }
    }

    #[test]
    fn exact_scores_match_generic_quadrature() {
        for f in [ScoreFunction::Psi, ScoreFunction::Savage, ScoreFunction::Wilcoxon, ScoreFunction::VanDerWaerden] {
            for n in [2, 5, 12] {
                let closed = score_vector(f, n, ScoreMode::Exact).unwrap();
                let quad = exact_scores_by_quadrature(|u| f.phi(u), n).unwrap();
                assert!(close(closed.values(), quad.values(), 1e-9), "{f:?} N={n}");
            }
        }
    }

    #[test]
    fn exact_scores_match_monte_carlo() {
        let n = 6;
        let draws = 200_000;
        let mut rng = crate::rng::RngSeed::new(11, 0).rng();
        for f in [ScoreFunction::VanDerWaerden, ScoreFunction::Median, ScoreFunction::Savage] {
            let exact = score_vector(f, n, ScoreMode::Exact).unwrap();
            let mut sum = vec![0.0; n];
            let mut sq = vec![0.0; n];
            let mut u = vec![0.0f64; n];
            for _ in 0..draws {
                for x in u.iter_mut() {
                    *x = rng.random();
                }
                u.sort_by(f64::total_cmp);
                for k in 0..n {
                    let v = f.phi(u[k]);
                    sum[k] += v;
                    sq[k] += v * v;
                }
            }
            for k in 0..n {
                let mean = sum[k] / draws as f64;
                let se = ((sq[k] / draws as f64 - mean * mean) / draws as f64).sqrt();
                assert!((mean - exact.values()[k]).abs() < 3.5 * se + 1e-12, "{f:?} k={}", k + 1);
            }
        }
    }

    #[test]
    fn affine_detection() {
        assert!(score_vector(ScoreFunction::Wilcoxon, 30, ScoreMode::Approximate).unwrap().affine_in_rank().is_some());
        assert_eq!(ScoreVector::raw_ranks(5).affine_in_rank(), Some((0.0, 1.0)));
        assert!(psi_scores(10).unwrap().affine_in_rank().is_none());
    }
}
