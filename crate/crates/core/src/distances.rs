//! Distance kernels on the pooled sample, the distance vectors feeding the
//! three rank-test schemes, and the maximal invariants of the affine and
//! linear groups.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use crate::data::PooledSample;
use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Largest condition number accepted when inverting a scatter matrix.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceKernel {
    /// `‖x − y‖`
    Euclidean,
    /// `(x − y)ᵀ (V⁰)⁻¹ (x − y)` with the uncentered scatter `V⁰ = Σ Z_k Z_kᵀ`.
    MahalanobisOrigin,
    /// `(x − y)ᵀ V⁻¹ (x − y)` with the centered scatter `V = Σ (Z_k − Z̄)(Z_k − Z̄)ᵀ`.
    MahalanobisCentered,
}

impl DistanceKernel {
    pub fn label(self) -> &'static str {
        match self {
            Self::Euclidean => "euclidean",
            Self::MahalanobisOrigin => "mahalanobis-origin",
            Self::MahalanobisCentered => "mahalanobis-centered",
        }
    }
}

impl std::str::FromStr for DistanceKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "euclidean" | "l2" => Ok(Self::Euclidean),
            "mahalanobis-origin" | "mahalanobis0" => Ok(Self::MahalanobisOrigin),
            "mahalanobis-centered" | "mahalanobis" => Ok(Self::MahalanobisCentered),
            other => Err(Error::InvalidArgument(format!("unknown distance kernel '{other}'"))),
        }
    }
}

/// Transformation groups with a maximal invariant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InvariantGroup {
    /// `Z → a + BZ`
    Affine,
    /// `Z → BZ`
    LinearOnly,
}

/// Uncentered scatter `Σ Z_k Z_kᵀ`.
pub fn origin_scatter(p: &PooledSample) -> DMatrix<f64> {
    p.matrix().transpose() * p.matrix()
}

/// Centered scatter `Σ (Z_k − Z̄)(Z_k − Z̄)ᵀ`.
pub fn centered_scatter(p: &PooledSample) -> DMatrix<f64> {
    crate::data::MultivariateSample::from_matrix(p.matrix().clone()).centered_scatter()
}

/// Inverse of a symmetric positive semidefinite matrix, refusing
/// ill-conditioned input instead of falling back to a pseudo-inverse.
pub fn checked_inverse(a: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let svd = a.clone().svd(true, true);
    let (max, min) = svd
        .singular_values
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::SingularMatrix {
            what: what.to_string(),
            condition,
        });
    }
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let inv_s = DMatrix::from_diagonal(&svd.singular_values.map(|s| 1.0 / s));
    let inv = vt.transpose() * inv_s * u.transpose();
    Ok((&inv + inv.transpose()) * 0.5)
}

/// Upper triangular `R` with `zᵀz = RᵀR`, taken from a QR factorisation of `z`
/// so the scatter matrix is never formed.
pub(crate) fn scatter_factor(z: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    if z.nrows() < z.ncols() {
        return Err(Error::SingularMatrix {
            what: what.to_string(),
            condition: f64::INFINITY,
        });
    }
    let r = z.clone().qr().r();
    let s = r.singular_values();
    let (max, min) = s.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &v| (hi.max(v), lo.min(v)));
    let condition = if min > 0.0 { (max / min).powi(2) } else { f64::INFINITY };
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(Error::SingularMatrix {
            what: what.to_string(),
            condition,
        });
    }
    Ok(r)
}

/// `‖R⁻ᵀ v‖²`, which equals `vᵀ (RᵀR)⁻¹ v`.
pub(crate) fn whitened_norm_sq(r: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    r.transpose()
        .solve_lower_triangular(v)
        .expect("factor checked nonsingular")
        .norm_squared()
}

/// A kernel bound to one pooled sample, with any scatter inverse precomputed.
#[derive(Debug, Clone)]
pub struct PreparedKernel {
    kernel: DistanceKernel,
    metric: Option<DMatrix<f64>>,
    center: Option<DVector<f64>>,
}

impl PreparedKernel {
    pub fn new(p: &PooledSample, kernel: DistanceKernel) -> Result<Self> {
        let (metric, center) = match kernel {
            DistanceKernel::Euclidean => (None, None),
            DistanceKernel::MahalanobisOrigin => (
                Some(checked_inverse(&origin_scatter(p), "uncentered scatter (mahalanobis-origin kernel)")?),
                None,
            ),
            DistanceKernel::MahalanobisCentered => {
                let mean = DVector::from_iterator(p.dim(), p.matrix().column_iter().map(|c| c.mean()));
                (
                    Some(checked_inverse(&centered_scatter(p), "centered scatter (mahalanobis-centered kernel)")?),
                    Some(mean),
                )
            }
        };
        Ok(Self { kernel, metric, center })
    }

    pub fn kernel(&self) -> DistanceKernel {
        self.kernel
    }

    fn form(&self, diff: &[f64]) -> f64 {
        match &self.metric {
            None => diff.iter().map(|d| d * d).sum::<f64>().sqrt(),
            Some(m) => {
                let p = diff.len();
                let mut acc = 0.0;
                for i in 0..p {
                    let mut row = 0.0;
                    for j in 0..p {
                        row += m[(i, j)] * diff[j];
                    }
                    acc += diff[i] * row;
                }
                acc
            }
        }
    }

    /// `L(Z_a, Z_b)` for 0-based pooled indices.
    pub fn between(&self, p: &PooledSample, a: usize, b: usize) -> f64 {
        let z = p.matrix();
        let diff: Vec<f64> = (0..p.dim()).map(|j| z[(a, j)] - z[(b, j)]).collect();
        self.form(&diff)
    }

    /// `L(o, Z_k)` where `o` is the origin, or the pooled mean for the centered kernel.
    pub fn from_origin(&self, p: &PooledSample, k: usize) -> f64 {
        let z = p.matrix();
        let diff: Vec<f64> = match &self.center {
            Some(c) => (0..p.dim()).map(|j| z[(k, j)] - c[j]).collect(),
            None => (0..p.dim()).map(|j| z[(k, j)]).collect(),
        };
        self.form(&diff)
    }
}

/// `L(0, Z_k)` for every pooled observation.
pub fn origin_distances(p: &PooledSample, kernel: DistanceKernel) -> Result<Vec<f64>> {
    let k = PreparedKernel::new(p, kernel)?;
    Ok((0..p.total()).map(|i| k.from_origin(p, i)).collect())
}

/// Distances from the pooled observation at 0-based `reference` to all others, in order.
pub(crate) fn distances_from(p: &PooledSample, reference: usize, k: &PreparedKernel) -> Vec<f64> {
    (0..p.total())
        .filter(|&j| j != reference)
        .map(|j| k.between(p, reference, j))
        .collect()
}

/// `L(X_i, Z_k)` for `k ≠ i`, with `i` a 1-based index into the first sample.
pub fn interpoint_distances(p: &PooledSample, i: usize, kernel: DistanceKernel) -> Result<Vec<f64>> {
    if i == 0 || i > p.m() {
        return Err(Error::IndexOutOfRange { index: i, max: p.m() });
    }
    let k = PreparedKernel::new(p, kernel)?;
    Ok(distances_from(p, i - 1, &k))
}

/// Distances from each basis point to the observations outside the basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisDistances {
    /// `p × (N − p)`; row `j` belongs to `basis[j]`.
    pub distances: DMatrix<f64>,
    /// 1-based pooled indices of the columns, in increasing order.
    pub columns: Vec<usize>,
    /// The 1-based basis indices.
    pub basis: Vec<usize>,
}

pub fn conditional_basis_distances(p: &PooledSample, basis: &[usize], kernel: DistanceKernel) -> Result<BasisDistances> {
    let dim = basis.len();
    if dim == 0 {
        return Err(Error::InvalidArgument("basis must not be empty".into()));
    }
    if p.m() <= dim {
        return Err(Error::InvalidArgument(format!(
            "the first sample must exceed the basis size, got m={} and p={dim}",
            p.m()
        )));
    }
    let mut seen = vec![false; p.m()];
    for &b in basis {
        if b == 0 || b > p.m() {
            return Err(Error::IndexOutOfRange { index: b, max: p.m() });
        }
        if std::mem::replace(&mut seen[b - 1], true) {
            return Err(Error::InvalidArgument(format!("basis index {b} repeated")));
        }
    }
    let k = PreparedKernel::new(p, kernel)?;
    let columns: Vec<usize> = (1..=p.total()).filter(|c| !basis.contains(c)).collect();
    let distances = DMatrix::from_fn(dim, columns.len(), |r, c| k.between(p, basis[r] - 1, columns[c] - 1));
    Ok(BasisDistances {
        distances,
        columns,
        basis: basis.to_vec(),
    })
}

/// How the conditional scheme picks its basis among the first sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisChoice {
    /// `X₁, …, X_p`
    First,
    /// A uniformly random `p`-subset of the first sample.
    Random,
    /// Greedy farthest-point selection starting from the point farthest from the origin.
    MaxSpread,
}

/// 1-based basis indices of size `size` chosen from the first sample.
pub fn choose_basis(p: &PooledSample, size: usize, choice: BasisChoice, seed: RngSeed) -> Result<Vec<usize>> {
    if size == 0 || size >= p.m() {
        return Err(Error::InvalidArgument(format!(
            "basis size must lie in 1..m (m={}), got {size}",
            p.m()
        )));
    }
    Ok(match choice {
        BasisChoice::First => (1..=size).collect(),
        BasisChoice::Random => {
            let mut v: Vec<usize> = sample_indices(&mut seed.rng(), p.m(), size).into_iter().map(|i| i + 1).collect();
            v.sort_unstable();
            v
        }
        BasisChoice::MaxSpread => {
            let k = PreparedKernel::new(p, DistanceKernel::Euclidean)?;
            let start = (0..p.m())
                .max_by(|&a, &b| k.from_origin(p, a).total_cmp(&k.from_origin(p, b)))
                .expect("m ≥ 1");
            let mut chosen = vec![start];
            let mut nearest: Vec<f64> = (0..p.m()).map(|i| k.between(p, i, start)).collect();
            while chosen.len() < size {
                let next = (0..p.m())
                    .filter(|i| !chosen.contains(i))
                    .max_by(|&a, &b| nearest[a].total_cmp(&nearest[b]))
                    .expect("size < m");
                chosen.push(next);
                for (i, d) in nearest.iter_mut().enumerate() {
                    *d = d.min(k.between(p, i, next));
                }
            }
            let mut v: Vec<usize> = chosen.into_iter().map(|i| i + 1).collect();
            v.sort_unstable();
            v
        }
    })
}

/// `T = [(Z_i − Z̄)ᵀ V⁻¹ (Z_j − Z̄)]` for the affine group or
/// `T₀ = [Z_iᵀ (V⁰)⁻¹ Z_j]` for the linear group.
pub fn maximal_invariant(p: &PooledSample, group: InvariantGroup) -> Result<DMatrix<f64>> {
    let z = match group {
        InvariantGroup::Affine => crate::data::centered(p.matrix()),
        InvariantGroup::LinearOnly => p.matrix().clone(),
    };
    scatter_factor(&z, "scatter (maximal invariant)")?;
    let q = z.qr().q();
    let t = &q * q.transpose();
    Ok((&t + t.transpose()) * 0.5)
}

/// Writes a distance matrix as headerless CSV.
pub fn write_matrix_csv<W: Write>(m: &DMatrix<f64>, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}
