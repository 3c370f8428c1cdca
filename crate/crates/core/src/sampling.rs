//! Random generation under the hypothesis, under the three Lehmann-type
//! alternative families, and under the bivariate location/scale scenarios.
//!
//! Univariate alternatives are generated on the uniform scale: with
//! `U = F(Z)` the ranks are unchanged, so the hypothesis CDF can be taken as
//! the identity on `[0, 1]`. [`sample_lehmann_pooled_with`] maps the draws
//! through any quantile function when real-scale values are wanted.

use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::MultivariateSample;
use crate::error::{check_unit_closed, Error, Result};
use crate::rng::RngSeed;

/// The three one-parameter families of Lehmann alternatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LehmannKind {
    /// First sample F, second `(1−Δ)F + ΔF²`; Wilcoxon is locally most powerful.
    WilcoxonType,
    /// First sample `1 − (1−F)^{1+Δ}`, second `F^{1+Δ}`; the Psi test is locally most powerful.
    PsiType,
    /// First sample F, second `F^{1+Δ}`; the Savage test is locally most powerful.
    SavageType,
}

impl LehmannKind {
    pub const ALL: [LehmannKind; 3] = [Self::WilcoxonType, Self::PsiType, Self::SavageType];

    pub fn label(self) -> &'static str {
        match self {
            Self::WilcoxonType => "wilcoxon-type",
            Self::PsiType => "psi-type",
            Self::SavageType => "savage-type",
        }
    }
}

/// Which of the two samples a distribution function refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Which {
    First,
    Second,
}

/// A Lehmann alternative with parameter Δ ≥ 0 (Δ < 1 for the Wilcoxon type).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LehmannAlternative {
    kind: LehmannKind,
    delta: f64,
}

impl LehmannAlternative {
    pub fn new(kind: LehmannKind, delta: f64) -> Result<Self> {
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::Domain {
                name: "delta",
                value: delta,
                domain: "[0, ∞)",
            });
        }
        // (1−Δ)u + Δu² stays a distribution up to Δ = 1; the family is stated for Δ < 1.
        if kind == LehmannKind::WilcoxonType && delta >= 1.0 {
            return Err(Error::Domain {
                name: "delta",
                value: delta,
                domain: "[0, 1) for the Wilcoxon-type family",
            });
        }
        Ok(Self { kind, delta })
    }

    /// The hypothesis, Δ = 0.
    pub fn null(kind: LehmannKind) -> Self {
        Self { kind, delta: 0.0 }
    }

    /// Local alternative `Δ = Δ₀ / √N`.
    pub fn local(kind: LehmannKind, delta0: f64, total: usize) -> Result<Self> {
        Self::new(kind, delta0 / (total as f64).sqrt())
    }

    pub fn kind(&self) -> LehmannKind {
        self.kind
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `G̃_Δ^{(1)}(u)` or `G̃_Δ^{(2)}(u)` on the uniform scale.
    pub fn cdf(&self, which: Which, u: f64) -> Result<f64> {
        check_unit_closed("u", u)?;
        Ok(self.cdf_unchecked(which, u))
    }

    pub(crate) fn cdf_unchecked(&self, which: Which, u: f64) -> f64 {
        let d = self.delta;
        match (self.kind, which) {
            (LehmannKind::WilcoxonType, Which::First) | (LehmannKind::SavageType, Which::First) => u,
            (LehmannKind::WilcoxonType, Which::Second) => (1.0 - d) * u + d * u * u,
            (LehmannKind::PsiType, Which::First) => -((1.0 + d) * (-u).ln_1p()).exp_m1(),
            (LehmannKind::PsiType, Which::Second) | (LehmannKind::SavageType, Which::Second) => {
                u.powf(1.0 + d)
            }
        }
    }

    /// Density of `G̃` on `(0, 1)`.
    pub fn density(&self, which: Which, u: f64) -> f64 {
        let d = self.delta;
        match (self.kind, which) {
            (LehmannKind::WilcoxonType, Which::First) | (LehmannKind::SavageType, Which::First) => 1.0,
            (LehmannKind::WilcoxonType, Which::Second) => (1.0 - d) + 2.0 * d * u,
            (LehmannKind::PsiType, Which::First) => (1.0 + d) * (1.0 - u).powf(d),
            (LehmannKind::PsiType, Which::Second) | (LehmannKind::SavageType, Which::Second) => {
                (1.0 + d) * u.powf(d)
            }
        }
    }

    /// Inverse of [`Self::cdf`].
    pub fn inverse(&self, which: Which, v: f64) -> Result<f64> {
        check_unit_closed("v", v)?;
        Ok(self.inverse_unchecked(which, v))
    }

    pub(crate) fn inverse_unchecked(&self, which: Which, v: f64) -> f64 {
        let d = self.delta;
        match (self.kind, which) {
            (LehmannKind::WilcoxonType, Which::First) | (LehmannKind::SavageType, Which::First) => v,
            // Rationalised root of Δt² + (1−Δ)t − v = 0; stable as Δ → 0.
            (LehmannKind::WilcoxonType, Which::Second) => {
                let b = 1.0 - d;
                2.0 * v / (b + (b * b + 4.0 * d * v).sqrt())
            }
            (LehmannKind::PsiType, Which::First) => -((-v).ln_1p() / (1.0 + d)).exp_m1(),
            (LehmannKind::PsiType, Which::Second) | (LehmannKind::SavageType, Which::Second) => {
                v.powf(1.0 / (1.0 + d))
            }
        }
    }

    /// Kolmogorov distance between the two sample distributions and the
    /// uniform-scale point `u = F(z)` where it is attained.
    pub fn kolmogorov_distance(&self) -> (f64, f64) {
        let d = self.delta;
        match self.kind {
            LehmannKind::WilcoxonType => (d / 4.0, 0.5),
            LehmannKind::PsiType => (1.0 - (-d).exp2(), 0.5),
            LehmannKind::SavageType => {
                if d == 0.0 {
                    (0.0, (-1.0f64).exp())
                } else {
                    let at = (-(1.0 + d).ln() / d).exp();
                    (d * at / (1.0 + d), at)
                }
            }
        }
    }
}

pub fn lehmann_cdf(alt: &LehmannAlternative, which: Which, u: f64) -> Result<f64> {
    alt.cdf(which, u)
}

pub fn lehmann_inverse(alt: &LehmannAlternative, which: Which, v: f64) -> Result<f64> {
    alt.inverse(which, v)
}

pub fn kolmogorov_distance(alt: &LehmannAlternative) -> (f64, f64) {
    alt.kolmogorov_distance()
}

/// `m` draws from `G̃^{(1)}` followed by `n` draws from `G̃^{(2)}`, on `[0, 1]`.
pub fn sample_lehmann_pooled(alt: &LehmannAlternative, m: usize, n: usize, seed: RngSeed) -> Result<Vec<f64>> {
    let mut rng = seed.rng();
    sample_lehmann_into(alt, m, n, &mut rng)
}

/// As [`sample_lehmann_pooled`], then mapped through the quantile function
/// `quantile` of a continuous, strictly increasing hypothesis distribution.
pub fn sample_lehmann_pooled_with<Q: Fn(f64) -> f64>(
    alt: &LehmannAlternative,
    m: usize,
    n: usize,
    seed: RngSeed,
    quantile: Q,
) -> Result<Vec<f64>> {
    Ok(sample_lehmann_pooled(alt, m, n, seed)?
        .into_iter()
        .map(quantile)
        .collect())
}

pub(crate) fn sample_lehmann_into<R: Rng + ?Sized>(
    alt: &LehmannAlternative,
    m: usize,
    n: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "group sizes must be positive, got m={m}, n={n}"
        )));
    }
    let mut out = Vec::with_capacity(m + n);
    for k in 0..m + n {
        let which = if k < m { Which::First } else { Which::Second };
        let v: f64 = rng.random();
        out.push(alt.inverse_unchecked(which, v));
    }
    Ok(out)
}

/// Distribution family for the second sample of a multivariate scenario.
/// The first sample is always drawn from the standard member of the family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Family {
    /// First sample `N_p(0, I)`, second `N_p(mean, covariance)`.
    Normal { mean: Vec<f64>, covariance: Vec<Vec<f64>> },
    /// Independent standard Cauchy coordinates; second sample `shift + scale·Y*`.
    CauchyIndep { shift: Vec<f64>, scale: f64 },
    /// Spherical p-variate Cauchy (multivariate t with one degree of
    /// freedom); second sample `shift + scale·Y*`.
    CauchySpherical { shift: Vec<f64>, scale: f64 },
}

/// A two-sample multivariate data-generating scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultivariateScenario {
    pub dimension: usize,
    pub family: Family,
    pub m: usize,
    pub n: usize,
}

impl MultivariateScenario {
    pub fn normal(mean: Vec<f64>, covariance_diag: Vec<f64>, m: usize, n: usize) -> Self {
        let p = mean.len();
        let covariance = (0..p)
            .map(|i| (0..p).map(|j| if i == j { covariance_diag[i] } else { 0.0 }).collect())
            .collect();
        Self {
            dimension: p,
            family: Family::Normal { mean, covariance },
            m,
            n,
        }
    }

    pub fn cauchy_indep(shift: Vec<f64>, scale: f64, m: usize, n: usize) -> Self {
        Self {
            dimension: shift.len(),
            family: Family::CauchyIndep { shift, scale },
            m,
            n,
        }
    }

    pub fn cauchy_spherical(shift: Vec<f64>, scale: f64, m: usize, n: usize) -> Self {
        Self {
            dimension: shift.len(),
            family: Family::CauchySpherical { shift, scale },
            m,
            n,
        }
    }

    pub fn with_sizes(&self, m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            ..self.clone()
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let sc: Self = serde_json::from_str(s)?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let sc: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    /// Loads a scenario from a `.json` or `.toml` file.
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

    pub fn validate(&self) -> Result<()> {
        self.prepare().map(|_| ())
    }

    /// Checks the scenario and precomputes what sampling needs.
    pub fn prepare(&self) -> Result<PreparedScenario> {
        let p = self.dimension;
        if p == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if self.m == 0 || self.n == 0 {
            return Err(Error::InvalidArgument(format!(
                "group sizes must be positive, got m={}, n={}",
                self.m, self.n
            )));
        }
        let check_len = |len: usize| {
            if len == p {
                Ok(())
            } else {
                Err(Error::LengthMismatch {
                    expected: p,
                    actual: len,
                })
            }
        };
        let kind = match &self.family {
            Family::Normal { mean, covariance } => {
                check_len(mean.len())?;
                check_len(covariance.len())?;
                for row in covariance {
                    check_len(row.len())?;
                }
                let cov = DMatrix::from_fn(p, p, |i, j| covariance[i][j]);
                if (&cov - cov.transpose()).amax() > 1e-12 * cov.amax().max(1.0) {
                    return Err(Error::InvalidArgument("covariance matrix is not symmetric".into()));
                }
                let chol = Cholesky::new(cov).ok_or_else(|| Error::SingularMatrix {
                    what: "covariance (not positive definite)".into(),
                    condition: f64::INFINITY,
                })?;
                PreparedKind::Normal {
                    mean: DVector::from_column_slice(mean),
                    factor: chol.l(),
                }
            }
            Family::CauchyIndep { shift, scale } | Family::CauchySpherical { shift, scale } => {
                check_len(shift.len())?;
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(Error::Domain {
                        name: "scale",
                        value: *scale,
                        domain: "(0, ∞)",
                    });
                }
                let shift = DVector::from_column_slice(shift);
                if matches!(self.family, Family::CauchyIndep { .. }) {
                    PreparedKind::CauchyIndep { shift, scale: *scale }
                } else {
                    PreparedKind::CauchySpherical { shift, scale: *scale }
                }
            }
        };
        Ok(PreparedScenario {
            dimension: p,
            m: self.m,
            n: self.n,
            kind,
        })
    }
}

/// A validated scenario ready for repeated sampling.
#[derive(Debug, Clone)]
pub struct PreparedScenario {
    dimension: usize,
    m: usize,
    n: usize,
    kind: PreparedKind,
}

#[derive(Debug, Clone)]
enum PreparedKind {
    Normal { mean: DVector<f64>, factor: DMatrix<f64> },
    CauchyIndep { shift: DVector<f64>, scale: f64 },
    CauchySpherical { shift: DVector<f64>, scale: f64 },
}

impl PreparedScenario {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (MultivariateSample, MultivariateSample) {
        let p = self.dimension;
        let mut x = DMatrix::zeros(self.m, p);
        let mut y = DMatrix::zeros(self.n, p);
        match &self.kind {
            PreparedKind::Normal { mean, factor } => {
                fill_normal(&mut x, rng);
                let mut z = DMatrix::zeros(self.n, p);
                fill_normal(&mut z, rng);
                y = &z * factor.transpose();
                for mut row in y.row_iter_mut() {
                    row += mean.transpose();
                }
            }
            PreparedKind::CauchyIndep { shift, scale } => {
                fill_cauchy(&mut x, rng);
                fill_cauchy(&mut y, rng);
                locate(&mut y, shift, *scale);
            }
            PreparedKind::CauchySpherical { shift, scale } => {
                fill_spherical_cauchy(&mut x, rng);
                fill_spherical_cauchy(&mut y, rng);
                locate(&mut y, shift, *scale);
            }
        }
        (
            MultivariateSample::from_matrix(x),
            MultivariateSample::from_matrix(y),
        )
    }
}

fn fill_normal<R: Rng + ?Sized>(m: &mut DMatrix<f64>, rng: &mut R) {
    // Row-major draw order so the stream layout matches the observation order.
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            m[(i, j)] = StandardNormal.sample(rng);
        }
    }
}

fn standard_cauchy<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    (std::f64::consts::PI * (u - 0.5)).tan()
}

fn fill_cauchy<R: Rng + ?Sized>(m: &mut DMatrix<f64>, rng: &mut R) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            m[(i, j)] = standard_cauchy(rng);
        }
    }
}

fn fill_spherical_cauchy<R: Rng + ?Sized>(m: &mut DMatrix<f64>, rng: &mut R) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            m[(i, j)] = StandardNormal.sample(rng);
        }
        let w: f64 = StandardNormal.sample(rng);
        let w = w.abs();
        for j in 0..m.ncols() {
            m[(i, j)] /= w;
        }
    }
}

fn locate(y: &mut DMatrix<f64>, shift: &DVector<f64>, scale: f64) {
    for mut row in y.row_iter_mut() {
        row *= scale;
        row += shift.transpose();
    }
}

/// Draws `(X, Y)` for the scenario.
pub fn sample_scenario(s: &MultivariateScenario, seed: RngSeed) -> Result<(MultivariateSample, MultivariateSample)> {
    let prepared = s.prepare()?;
    Ok(prepared.sample(&mut seed.rng()))
}
