//! Sample containers and their CSV representation.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// An ordered collection of `p`-dimensional observations, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSample {
    data: DMatrix<f64>,
}

impl MultivariateSample {
    pub fn from_matrix(data: DMatrix<f64>) -> Self {
        Self { data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if p == 0 {
            return Err(Error::InvalidArgument(
                "a sample needs at least one row of positive dimension".into(),
            ));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != p) {
            return Err(Error::LengthMismatch {
                expected: p,
                actual: bad.len(),
            });
        }
        Ok(Self {
            data: DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]),
        })
    }

    /// Univariate sample, one value per row.
    pub fn from_values(values: &[f64]) -> Self {
        Self {
            data: DMatrix::from_column_slice(values.len(), 1, values),
        }
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn row(&self, i: usize) -> DVector<f64> {
        self.data.row(i).transpose()
    }

    pub fn rows(&self) -> impl Iterator<Item = DVector<f64>> + '_ {
        (0..self.len()).map(move |i| self.row(i))
    }

    pub fn mean(&self) -> DVector<f64> {
        self.data.row_mean().transpose()
    }

    /// Sum of outer products of the centered rows.
    pub fn centered_scatter(&self) -> DMatrix<f64> {
        let centered = centered(&self.data);
        centered.transpose() * centered
    }

    /// Unbiased sample covariance (scatter / (len − 1)).
    pub fn covariance(&self) -> DMatrix<f64> {
        self.centered_scatter() / (self.len() as f64 - 1.0)
    }

    /// Applies `z ↦ shift + B z` to every row.
    pub fn affine(&self, shift: &DVector<f64>, b: &DMatrix<f64>) -> Self {
        let mut data = &self.data * b.transpose();
        for mut row in data.row_iter_mut() {
            row += shift.transpose();
        }
        Self { data }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record((1..=self.dim()).map(|j| format!("x{j}")))?;
        for row in self.data.row_iter() {
            w.write_record(row.iter().map(|v| format!("{v:?}")))?;
        }
        w.flush().map_err(|source| Error::Io {
            path: "<writer>".into(),
            source,
        })?;
        Ok(())
    }
}

pub(crate) fn centered(data: &DMatrix<f64>) -> DMatrix<f64> {
    let mean = data.row_mean();
    let mut out = data.clone();
    for mut row in out.row_iter_mut() {
        row -= &mean;
    }
    out
}

/// The pooled sample `Z = (X₁..X_m, Y₁..Y_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledSample {
    z: DMatrix<f64>,
    m: usize,
}

impl PooledSample {
    pub fn new(x: &MultivariateSample, y: &MultivariateSample) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::InvalidArgument(
                "both groups need at least one observation".into(),
            ));
        }
        if x.dim() != y.dim() {
            return Err(Error::LengthMismatch {
                expected: x.dim(),
                actual: y.dim(),
            });
        }
        let (m, n, p) = (x.len(), y.len(), x.dim());
        let z = DMatrix::from_fn(m + n, p, |i, j| {
            if i < m {
                x.matrix()[(i, j)]
            } else {
                y.matrix()[(i - m, j)]
            }
        });
        Ok(Self { z, m })
    }

    pub fn from_matrix(z: DMatrix<f64>, m: usize) -> Result<Self> {
        if m == 0 || m >= z.nrows() {
            return Err(Error::InvalidArgument(format!(
                "first group size {m} must lie in 1..{}",
                z.nrows()
            )));
        }
        Ok(Self { z, m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.z.nrows() - self.m
    }

    pub fn total(&self) -> usize {
        self.z.nrows()
    }

    pub fn dim(&self) -> usize {
        self.z.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.z
    }

    /// Row `k` (0-based) of the pooled sample.
    pub fn row(&self, k: usize) -> DVector<f64> {
        self.z.row(k).transpose()
    }

    pub fn first(&self) -> MultivariateSample {
        MultivariateSample::from_matrix(self.z.rows(0, self.m).into_owned())
    }

    pub fn second(&self) -> MultivariateSample {
        MultivariateSample::from_matrix(self.z.rows(self.m, self.n()).into_owned())
    }

    /// The same observations with the group order reversed (Y's first).
    pub fn swapped(&self) -> Self {
        let (m, n) = (self.m, self.n());
        let z = DMatrix::from_fn(self.total(), self.dim(), |i, j| {
            if i < n {
                self.z[(m + i, j)]
            } else {
                self.z[(i - n, j)]
            }
        });
        Self { z, m: n }
    }

    pub fn affine(&self, shift: &DVector<f64>, b: &DMatrix<f64>) -> Self {
        let moved = MultivariateSample::from_matrix(self.z.clone()).affine(shift, b);
        Self {
            z: moved.data,
            m: self.m,
        }
    }
}

/// Reads a numeric CSV with a header row. Columns named `group` (case
/// insensitive) are returned separately; every other column is a coordinate.
pub fn read_csv<R: Read>(reader: R) -> Result<(MultivariateSample, Option<Vec<u8>>)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let group_col = headers.iter().position(|h| h.eq_ignore_ascii_case("group"));
    let mut rows = Vec::new();
    let mut groups = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let mut row = Vec::with_capacity(record.len());
        for (j, field) in record.iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                Error::InvalidArgument(format!(
                    "row {}: column '{}' is not numeric: '{field}'",
                    line + 2,
                    headers.get(j).unwrap_or("?")
                ))
            })?;
            if Some(j) == group_col {
                let g = value as u8;
                if value != 1.0 && value != 2.0 {
                    return Err(Error::InvalidArgument(format!(
                        "row {}: group must be 1 or 2, got {field}",
                        line + 2
                    )));
                }
                groups.push(g);
            } else {
                row.push(value);
            }
        }
        rows.push(row);
    }
    let sample = MultivariateSample::from_rows(&rows)?;
    Ok((sample, group_col.map(|_| groups)))
}

pub fn read_csv_path(path: &Path) -> Result<(MultivariateSample, Option<Vec<u8>>)> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file)
}

/// Splits a sample by a 1/2 group column.
pub fn split_groups(sample: &MultivariateSample, groups: &[u8]) -> Result<(MultivariateSample, MultivariateSample)> {
    if groups.len() != sample.len() {
        return Err(Error::LengthMismatch {
            expected: sample.len(),
            actual: groups.len(),
        });
    }
    let pick = |g: u8| {
        let idx: Vec<usize> = (0..sample.len()).filter(|&i| groups[i] == g).collect();
        MultivariateSample::from_matrix(sample.matrix().select_rows(idx.iter()))
    };
    Ok((pick(1), pick(2)))
}
