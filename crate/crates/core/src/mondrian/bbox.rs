use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Axis-aligned box with per-dimension bounds `min[j] <= max[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoundingBox {
    /// Degenerate box around a single point.
    pub fn point(x: &[f64]) -> Self {
        Self {
            min: x.to_vec(),
            max: x.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Sum of side lengths; the rate of the Mondrian split clock.
    pub fn linear_dimension(&self) -> f64 {
        linear_dimension(&self.min, &self.max)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        contains(&self.min, &self.max, x)
    }

    pub fn is_within(&self, outer: &BoundingBox) -> bool {
        self.min.iter().zip(&outer.min).all(|(a, b)| a >= b)
            && self.max.iter().zip(&outer.max).all(|(a, b)| a <= b)
    }

    pub fn include(&mut self, x: &[f64]) {
        include(&mut self.min, &mut self.max, x);
    }
}

/// Componentwise min/max over a nonempty set of points.
pub fn smallest_block(points: &Dataset) -> Result<BoundingBox> {
    let mut rows = points.rows();
    let first = rows.next().ok_or(Error::Empty("smallest block of no points"))?;
    let mut bbox = BoundingBox::point(first);
    for row in rows {
        bbox.include(row);
    }
    Ok(bbox)
}

pub(crate) fn linear_dimension(min: &[f64], max: &[f64]) -> f64 {
    min.iter().zip(max).map(|(lo, hi)| hi - lo).sum()
}

pub(crate) fn contains(min: &[f64], max: &[f64], x: &[f64]) -> bool {
    x.iter()
        .zip(min.iter().zip(max))
        .all(|(v, (lo, hi))| lo <= v && v <= hi)
}

pub(crate) fn include(min: &mut [f64], max: &mut [f64], x: &[f64]) {
    for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(x) {
        if v < *lo {
            *lo = v;
        }
        if v > *hi {
            *hi = v;
        }
    }
}
