//! CSV writers for score exports, experiment tables and lattice dumps.
//!
//! Reals are written in shortest round-trip form, so identical inputs give
//! byte-identical files.

use std::io::Write;

use crate::dataset::{Dataset, LabeledDataset};
use crate::decision::{DecisionModel, Label};
use crate::error::{Error, Result};
use crate::eval::ResultRow;
use crate::forest::{Forest, ScoreReport};
use crate::par;

fn label_code(label: Label) -> u8 {
    u8::from(label.is_anomaly())
}

/// `index,score,label,mode`, one row per report. `label` is 1 for anomaly.
pub fn write_scores<W: Write>(
    mut w: W,
    reports: &[ScoreReport],
    decision: &DecisionModel,
) -> Result<()> {
    writeln!(w, "index,score,label,mode")?;
    let mode = decision.mode();
    for r in reports {
        let label = label_code(decision.assign(r.score));
        writeln!(w, "{},{},{label},{mode}", r.index, r.score)?;
    }
    Ok(())
}

pub fn write_result_rows<W: Write>(mut w: W, rows: &[ResultRow]) -> Result<()> {
    writeln!(
        w,
        "dataset,unit,index,split,n,auc,train_seconds,score_seconds,flagged,config_hash"
    )?;
    for r in rows {
        let auc = r.auc.map(|a| a.to_string()).unwrap_or_default();
        let flagged = r.flagged.map(|f| f.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{auc},{},{},{flagged},{}",
            r.dataset, r.unit, r.index, r.split, r.n, r.train_seconds, r.score_seconds, r.config_hash
        )?;
    }
    Ok(())
}

/// A regular `resolution x resolution` lattice over a 2-D rectangle,
/// corners included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub resolution: usize,
}

impl Grid {
    /// The data's bounding rectangle padded by `pad` of its extent on every
    /// side (at least 0.5 for a flat axis).
    pub fn around(data: &Dataset, resolution: usize, pad: f64) -> Result<Grid> {
        if data.dim() != 2 {
            return Err(Error::invalid(format!(
                "lattice dumps need 2-D data, got {} dimensions",
                data.dim()
            )));
        }
        if data.is_empty() {
            return Err(Error::Empty("no points to frame a lattice"));
        }
        let axis = |j: usize| {
            let (lo, hi) = data
                .rows()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                    (lo.min(r[j]), hi.max(r[j]))
                });
            let margin = ((hi - lo) * pad).max(0.5);
            (lo - margin, hi + margin)
        };
        let grid = Grid {
            x: axis(0),
            y: axis(1),
            resolution,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution < 2 {
            return Err(Error::invalid("lattice resolution must be at least 2"));
        }
        for (lo, hi) in [self.x, self.y] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!("bad lattice range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    fn coord((lo, hi): (f64, f64), i: usize, resolution: usize) -> f64 {
        lo + (hi - lo) * i as f64 / (resolution - 1) as f64
    }

    /// Lattice points, `x` varying fastest.
    pub fn points(&self) -> Dataset {
        let n = self.resolution;
        let mut values = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            let y = Self::coord(self.y, j, n);
            for i in 0..n {
                values.push(Self::coord(self.x, i, n));
                values.push(y);
            }
        }
        Dataset::new(values, 2).expect("finite lattice")
    }
}

pub fn write_grid_header<W: Write>(mut w: W) -> Result<()> {
    writeln!(w, "stage,x,y,score,label")?;
    Ok(())
}

/// Scores every lattice point and appends `stage,x,y,score,label` rows.
pub fn write_grid<W: Write>(
    mut w: W,
    stage: usize,
    grid: &Grid,
    forest: &Forest,
    decision: &DecisionModel,
) -> Result<()> {
    grid.validate()?;
    let points = grid.points();
    let reports = forest.score_all(&points)?;
    for (x, r) in points.rows().zip(&reports) {
        let label = label_code(decision.assign(r.score));
        writeln!(w, "{stage},{},{},{},{label}", x[0], x[1], r.score)?;
    }
    Ok(())
}

/// Labels for a scored dataset under `decision`, in row order.
pub fn assign_reports(reports: &[ScoreReport], decision: &DecisionModel) -> Vec<Label> {
    par::map_indices(reports.len(), |i| decision.assign(reports[i].score))
}

/// Fraction of points on which two label vectors agree.
pub fn agreement(a: &[Label], b: &[Label]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid("label vectors differ in length"));
    }
    if a.is_empty() {
        return Err(Error::Empty("no labels to compare"));
    }
    let same = a.iter().zip(b).filter(|(x, y)| x == y).count();
    Ok(same as f64 / a.len() as f64)
}

/// Writes a labeled dataset's points with their scores: `x1..xd,truth,score`.
pub fn write_scored_points<W: Write>(
    mut w: W,
    dataset: &LabeledDataset,
    reports: &[ScoreReport],
) -> Result<()> {
    let d = dataset.data.dim();
    let header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    writeln!(w, "{},truth,score", header.join(","))?;
    for r in reports {
        for v in dataset.data.row(r.index) {
            write!(w, "{v},")?;
        }
        writeln!(w, "{},{}", u8::from(dataset.labels[r.index]), r.score)?;
    }
    Ok(())
}
