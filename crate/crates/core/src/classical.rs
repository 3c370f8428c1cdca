//! Comparator tests: two-sample Hotelling T² and the Liu–Singh depth
//! rank-sum test built on Mahalanobis depth.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::data::{MultivariateSample, PooledSample};
use crate::data::centered;
use crate::distances::{scatter_factor, whitened_norm_sq};
use crate::error::{check_unit_open, Error, Result};
use crate::rng::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HotellingResult {
    pub t2: f64,
    /// `(N − p − 1) / ((N − 2) p) · T²`, F-distributed with `(p, N − p − 1)` degrees of freedom under normality.
    pub f_statistic: f64,
    pub df1: f64,
    pub df2: f64,
    pub p_value: f64,
    pub reject: bool,
}

/// `T² = (mn/N) (X̄ − Ȳ)ᵀ S_p⁻¹ (X̄ − Ȳ)` with the pooled covariance `S_p`.
pub fn hotelling_test(x: &MultivariateSample, y: &MultivariateSample, alpha: f64) -> Result<HotellingResult> {
    check_unit_open("alpha", alpha)?;
    if x.dim() != y.dim() {
        return Err(Error::LengthMismatch {
            expected: x.dim(),
            actual: y.dim(),
        });
    }
    let (m, n, p) = (x.len() as f64, y.len() as f64, x.dim() as f64);
    let total = m + n;
    if total - 2.0 <= p {
        return Err(Error::InvalidArgument(format!(
            "Hotelling's test needs m + n − 2 > p, got m={m}, n={n}, p={p}"
        )));
    }
    let (cx, cy) = (centered(x.matrix()), centered(y.matrix()));
    let mut stacked = DMatrix::zeros(cx.nrows() + cy.nrows(), cx.ncols());
    stacked.rows_mut(0, cx.nrows()).copy_from(&cx);
    stacked.rows_mut(cx.nrows(), cy.nrows()).copy_from(&cy);
    let r = scatter_factor(&stacked, "pooled covariance")?;
    let d = x.mean() - y.mean();
    let t2 = (m * n / total) * (total - 2.0) * whitened_norm_sq(&r, &d);
    let (df1, df2) = (p, total - p - 1.0);
    let f_statistic = df2 / ((total - 2.0) * p) * t2;
    let dist = FisherSnedecor::new(df1, df2).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let p_value = dist.sf(f_statistic).clamp(0.0, 1.0);
    Ok(HotellingResult {
        t2,
        f_statistic,
        df1,
        df2,
        p_value,
        reject: p_value <= alpha,
    })
}

/// Mahalanobis depth with respect to a fitted reference sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MahalanobisDepth {
    mean: DVector<f64>,
    factor: DMatrix<f64>,
    dof: f64,
}

impl MahalanobisDepth {
    pub fn fit(reference: &MultivariateSample) -> Result<Self> {
        if reference.len() <= reference.dim() {
            return Err(Error::InvalidArgument(format!(
                "depth needs more observations ({}) than dimensions ({})",
                reference.len(),
                reference.dim()
            )));
        }
        Ok(Self {
            mean: reference.mean(),
            factor: scatter_factor(&centered(reference.matrix()), "reference covariance")?,
            dof: reference.len() as f64 - 1.0,
        })
    }

    /// `[1 + (y − μ̂)ᵀ Σ̂⁻¹ (y − μ̂)]⁻¹`
    pub fn depth(&self, y: &DVector<f64>) -> f64 {
        let d = y - &self.mean;
        1.0 / (1.0 + self.dof * whitened_norm_sq(&self.factor, &d))
    }
}

pub fn mahalanobis_depth(y: &DVector<f64>, reference: &MultivariateSample) -> Result<f64> {
    if y.len() != reference.dim() {
        return Err(Error::LengthMismatch {
            expected: reference.dim(),
            actual: y.len(),
        });
    }
    Ok(MahalanobisDepth::fit(reference)?.depth(y))
}

/// Quality index `Q(F_m, G_n) = (1/n) Σ_j #{i : D(X_i) ≤ D(Y_j)} / m`, depths taken relative to the `X` sample.
pub fn quality_index(x: &MultivariateSample, y: &MultivariateSample) -> Result<f64> {
    let depth = MahalanobisDepth::fit(x)?;
    let mut dx: Vec<f64> = x.rows().map(|r| depth.depth(&r)).collect();
    dx.sort_by(f64::total_cmp);
    let m = dx.len() as f64;
    let sum: f64 = y
        .rows()
        .map(|r| {
            let d = depth.depth(&r);
            dx.partition_point(|&v| v <= d) as f64 / m
        })
        .sum();
    Ok(sum / y.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum DepthCalibration {
    /// `count` random relabellings of the pooled sample.
    Permutation { count: usize, seed: RngSeed },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthTestResult {
    pub q: f64,
    /// `|Q − ½|`
    pub statistic: f64,
    pub p_value: f64,
    pub reject: bool,
    pub permutations: usize,
    /// Permutation replicates redrawn because the relabelled first group had a singular covariance.
    pub redrawn: usize,
}

const MAX_REDRAWS: usize = 100;

/// Two-sided Liu–Singh test: rejects for large `|Q − ½|`, with the permutation
/// p-value `(b + 1)/(B + 1)`.
pub fn liu_singh_test(x: &MultivariateSample, y: &MultivariateSample, alpha: f64, calibration: DepthCalibration) -> Result<DepthTestResult> {
    check_unit_open("alpha", alpha)?;
    let q = quality_index(x, y)?;
    let observed = (q - 0.5).abs();
    let pooled = PooledSample::new(x, y)?;
    let DepthCalibration::Permutation { count, seed } = calibration;
    if count == 0 {
        return Err(Error::InvalidArgument("permutation count must be positive".into()));
    }
    let (m, total) = (pooled.m(), pooled.total());
    let z = pooled.matrix();
    let outcomes: Vec<Result<(bool, usize)>> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.with_stream(k as u64).rng();
            let mut order: Vec<usize> = (0..total).collect();
            for redraw in 0..=MAX_REDRAWS {
                order.shuffle(&mut rng);
                let xs = MultivariateSample::from_matrix(z.select_rows(&order[..m]));
                let ys = MultivariateSample::from_matrix(z.select_rows(&order[m..]));
                match quality_index(&xs, &ys) {
                    Ok(qk) => return Ok(((qk - 0.5).abs() >= observed - 1e-12, redraw)),
                    Err(Error::SingularMatrix { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            Err(Error::InvalidArgument(format!(
                "permutation {k}: covariance singular in {MAX_REDRAWS} consecutive relabellings"
            )))
        })
        .collect();
    let mut exceed = 0;
    let mut redrawn = 0;
    for o in outcomes {
        let (hit, r) = o?;
        exceed += usize::from(hit);
        redrawn += r;
    }
    let p_value = (exceed as f64 + 1.0) / (count as f64 + 1.0);
    Ok(DepthTestResult {
        q,
        statistic: observed,
        p_value,
        reject: p_value <= alpha,
        permutations: count,
        redrawn,
    })
}
