//! Wall-clock scaling report for training, scoring and extension on
//! uniform data.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::forest::{Forest, ForestConfig};
use crate::io::synthetic::uniform_dataset;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Train,
    Score,
    Extend,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::Train, Phase::Score, Phase::Extend];
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Train => "train",
            Phase::Score => "score",
            Phase::Extend => "extend",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingConfig {
    /// Dataset sizes, ascending; ratios are reported between consecutive
    /// sizes that differ by a factor of two.
    pub sizes: Vec<usize>,
    pub d: usize,
    pub num_trees: usize,
    pub runs: usize,
    /// Worker counts to compare. Ignored (forced to one) without the
    /// `parallel` feature.
    pub threads: Vec<usize>,
    pub seed: u64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            sizes: vec![1 << 12, 1 << 13, 1 << 14, 1 << 15],
            d: 8,
            num_trees: 20,
            runs: 3,
            threads: default_threads(),
            seed: 0,
        }
    }
}

/// One worker and, if more are available, all of them.
pub fn default_threads() -> Vec<usize> {
    let all = if cfg!(feature = "parallel") {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        1
    };
    if all > 1 {
        vec![1, all]
    } else {
        vec![1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub phase: Phase,
    pub threads: usize,
    pub n: usize,
    /// Seconds per run.
    pub seconds: Vec<f64>,
    pub median: f64,
    pub std_dev: f64,
    /// `median(n) / median(n / 2)`, when `n / 2` was also measured.
    pub doubling_ratio: Option<f64>,
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

/// Sample standard deviation; zero for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

fn time<R>(f: impl FnOnce() -> R) -> (R, f64) {
    let started = Instant::now();
    let r = f();
    (r, started.elapsed().as_secs_f64())
}

/// Times one train/score/extend cycle at size `n`. Subsampling is off so
/// the whole dataset is partitioned; extension inserts `n / 4` fresh
/// points.
fn measure(config: &ScalingConfig, n: usize) -> Result<[f64; 3]> {
    let data = uniform_dataset(n, config.d, config.seed);
    let fresh = uniform_dataset((n / 4).max(1), config.d, config.seed.wrapping_add(1));
    let forest_config = ForestConfig {
        num_trees: config.num_trees,
        subsample: None,
        seed: config.seed,
    };
    let (forest, train) = time(|| Forest::train(&data, &forest_config));
    let mut forest = forest?;
    let (scores, score) = time(|| forest.score_all(&data));
    scores?;
    let (extended, extend) = time(|| forest.extend(&fresh));
    extended?;
    Ok([train, score, extend])
}

pub fn run_scaling(config: &ScalingConfig) -> Result<Vec<ScalingRow>> {
    if config.sizes.is_empty() || config.sizes.contains(&0) {
        return Err(Error::invalid("benchmark sizes must be positive"));
    }
    if config.runs == 0 || config.num_trees == 0 || config.d == 0 {
        return Err(Error::invalid("runs, trees and dimension must be positive"));
    }
    let threads = if cfg!(feature = "parallel") {
        config.threads.clone()
    } else {
        vec![1]
    };
    if threads.is_empty() || threads.contains(&0) {
        return Err(Error::invalid("thread counts must be positive"));
    }

    let mut rows = Vec::new();
    for &t in &threads {
        let mut timings = Vec::with_capacity(config.sizes.len());
        for &n in &config.sizes {
            let mut runs = Vec::with_capacity(config.runs);
            for _ in 0..config.runs {
                runs.push(par::with_threads(t, || measure(config, n))??);
            }
            timings.push((n, runs));
        }
        for (k, phase) in Phase::ALL.into_iter().enumerate() {
            let mut medians: Vec<(usize, f64)> = Vec::new();
            for (n, runs) in &timings {
                let seconds: Vec<f64> = runs.iter().map(|r| r[k]).collect();
                let med = median(&seconds);
                let doubling_ratio = medians
                    .iter()
                    .find(|(m, _)| 2 * m == *n)
                    .map(|(_, prev)| med / prev);
                medians.push((*n, med));
                rows.push(ScalingRow {
                    phase,
                    threads: t,
                    n: *n,
                    std_dev: std_dev(&seconds),
                    median: med,
                    seconds,
                    doubling_ratio,
                });
            }
        }
    }
    Ok(rows)
}

/// Median of the doubling ratios for `phase` at `threads` workers whose
/// base size (the smaller `n`) is in `bases`.
pub fn median_doubling_ratio(
    rows: &[ScalingRow],
    phase: Phase,
    threads: usize,
    bases: &[usize],
) -> Option<f64> {
    let ratios: Vec<f64> = rows
        .iter()
        .filter(|r| r.phase == phase && r.threads == threads && bases.contains(&(r.n / 2)))
        .filter_map(|r| r.doubling_ratio)
        .collect();
    (!ratios.is_empty()).then(|| median(&ratios))
}

pub fn write_scaling<W: Write>(mut w: W, rows: &[ScalingRow]) -> Result<()> {
    writeln!(w, "phase,threads,n,runs,median_seconds,std_seconds,doubling_ratio")?;
    for r in rows {
        let ratio = r.doubling_ratio.map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{ratio}",
            r.phase,
            r.threads,
            r.n,
            r.seconds.len(),
            r.median,
            r.std_dev
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_spread() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(std_dev(&[1.0]), 0.0);
        assert!((std_dev(&[1.0, 2.0, 3.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn small_report_shape() {
        let cfg = ScalingConfig {
            sizes: vec![64, 128, 256],
            d: 2,
            num_trees: 3,
            runs: 2,
            threads: vec![1],
            seed: 5,
        };
        let rows = run_scaling(&cfg).unwrap();
        assert_eq!(rows.len(), 3 * 3);
        for r in &rows {
            assert_eq!(r.seconds.len(), 2);
            assert_eq!(r.doubling_ratio.is_some(), r.n > 64);
        }
        assert!(median_doubling_ratio(&rows, Phase::Train, 1, &[64, 128]).is_some());
        let mut buf = Vec::new();
        write_scaling(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 10);
    }

    #[test]
    fn rejects_empty_config() {
        let cfg = ScalingConfig {
            sizes: vec![],
            ..ScalingConfig::default()
        };
        assert!(run_scaling(&cfg).is_err());
    }
}
