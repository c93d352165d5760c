//! Row-major point storage.

use crate::error::{Error, Result};

/// A set of `n` points in `d` dimensions, stored row-major.
///
/// All coordinates are finite and every row has the same length. An empty
/// dataset may carry `d = 0` when its width is unknown (e.g. an empty file
/// without a header).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    d: usize,
}

impl Dataset {
    pub fn new(values: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            if values.is_empty() {
                return Ok(Self::empty(0));
            }
            return Err(Error::invalid("dimensionality must be at least 1"));
        }
        if !values.len().is_multiple_of(d) {
            return Err(Error::invalid(format!(
                "{} values do not form rows of width {d}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / d,
                column: pos % d,
            });
        }
        Ok(Self { values, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Ok(Self::empty(0));
        };
        let d = first.as_ref().len();
        let mut values = Vec::with_capacity(rows.len() * d);
        for row in rows {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(values, d)
    }

    pub fn empty(d: usize) -> Self {
        Self {
            values: Vec::new(),
            d,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len().checked_div(self.d).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        // chunks_exact panics on zero width
        self.values.chunks_exact(self.d.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Appends a row, checking width and finiteness.
    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if self.d == 0 && self.values.is_empty() {
            self.d = row.len();
        }
        check_point(row, self.d)?;
        self.values.extend_from_slice(row);
        Ok(())
    }

    /// Copies the given rows, in the given order, into a new dataset.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Dataset { values, d: self.d }
    }

    /// Rows `start..end` as a dataset.
    pub fn slice(&self, start: usize, end: usize) -> Dataset {
        Dataset {
            values: self.values[start * self.d..end * self.d].to_vec(),
            d: self.d,
        }
    }
}

/// Validates a single point against an expected dimensionality.
pub fn check_point(x: &[f64], d: usize) -> Result<()> {
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.len(),
        });
    }
    if let Some(column) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: 0, column });
    }
    Ok(())
}

/// Points with ground-truth anomaly labels (`true` = anomaly). Labels are
/// only ever used for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub data: Dataset,
    pub labels: Vec<bool>,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, data: Dataset, labels: Vec<bool>) -> Result<Self> {
        if data.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} points but {} labels",
                data.len(),
                labels.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            data,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn anomaly_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn select(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            name: self.name.clone(),
            data: self.data.select(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = Dataset::new(vec![0.0, 1.0, f64::NAN, 2.0], 2).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 1, column: 0 }));
        assert!(Dataset::new(vec![f64::INFINITY], 1).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        let err = Dataset::from_rows(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 2, found: 1 }));
    }

    #[test]
    fn select_preserves_order() {
        let ds = Dataset::from_rows(&[[0.0], [1.0], [2.0]]).unwrap();
        let s = ds.select(&[2, 0]);
        assert_eq!(s.as_slice(), &[2.0, 0.0]);
        assert_eq!(ds.slice(1, 3).as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn empty_dataset() {
        let ds = Dataset::empty(3);
        assert_eq!(ds.len(), 0);
        assert_eq!(ds.rows().count(), 0);
        assert_eq!(Dataset::empty(0).rows().count(), 0);
    }
}
