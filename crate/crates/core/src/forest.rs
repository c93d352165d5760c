//! The ensemble: batch training, isolation scores, streaming extension.

use rand::seq::index;
use rand::SeedableRng;

use crate::dataset::{check_point, Dataset};
use crate::error::{Error, Result};
use crate::mondrian::{Tree, TreeRng};
use crate::par;

/// Euler–Mascheroni constant, to the precision used by the harmonic
/// approximation below.
pub const EULER_GAMMA: f64 = 0.5772156649;

/// Approximate `i`-th harmonic number, `ln(i) + γ`.
pub fn harmonic(i: usize) -> Result<f64> {
    if i < 1 {
        return Err(Error::invalid("harmonic number needs i >= 1"));
    }
    Ok((i as f64).ln() + EULER_GAMMA)
}

/// Average path length of an unsuccessful search in a binary search tree
/// of `n` nodes, `c(n) = 2 H(n-1) - 2 (n-1) / n`; the score normaliser.
pub fn c_factor(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("c(n) needs n >= 2"));
    }
    let m = (n - 1) as f64;
    Ok(2.0 * harmonic(n - 1)? - 2.0 * m / n as f64)
}

/// `s = 2^(-E(l) / c)`.
pub fn anomaly_score(expected_path_length: f64, c: f64) -> f64 {
    (-expected_path_length / c).exp2()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestConfig {
    pub num_trees: usize,
    /// Per-tree subsample size; `None` trains every tree on the full batch.
    pub subsample: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            num_trees: 100,
            subsample: Some(256),
            seed: 0,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_trees == 0 {
            return Err(Error::invalid("num_trees must be at least 1"));
        }
        if let Some(psi) = self.subsample {
            if psi < 2 {
                return Err(Error::invalid(format!("subsample size {psi} is below 2")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreReport {
    pub index: usize,
    pub expected_path_length: f64,
    pub score: f64,
}

/// How many of the most recent points to re-score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    All,
    Latest(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forest {
    trees: Vec<Tree>,
    n_effective: usize,
    c: f64,
    psi: Option<usize>,
    seed: u64,
    d: usize,
}

impl Forest {
    /// Trains `num_trees` trees, tree `t` seeded with `seed + t`. Each tree
    /// draws its own subsample of `min(psi, n)` points without replacement.
    pub fn train(data: &Dataset, config: &ForestConfig) -> Result<Forest> {
        config.validate()?;
        if data.is_empty() {
            return Err(Error::Empty("cannot train on an empty dataset"));
        }
        let n = data.len();
        let n_effective = config.subsample.map_or(n, |psi| psi.min(n));
        if n_effective < 2 {
            return Err(Error::invalid(
                "need at least 2 training points to normalise scores",
            ));
        }
        let trees = par::try_map_indices(config.num_trees, |t| {
            let mut rng = TreeRng::seed_from_u64(config.seed.wrapping_add(t as u64));
            if n_effective < n {
                let mut sample = index::sample(&mut rng, n, n_effective).into_vec();
                sample.sort_unstable();
                Tree::fit_indices(data, &sample, rng)
            } else {
                Tree::fit(data, rng)
            }
        })?;
        Self::from_parts(trees, n_effective, config.subsample, config.seed)
    }

    /// Assembles a forest from already-built trees.
    pub fn from_parts(
        trees: Vec<Tree>,
        n_effective: usize,
        psi: Option<usize>,
        seed: u64,
    ) -> Result<Forest> {
        let d = trees
            .first()
            .ok_or(Error::Empty("forest needs at least one tree"))?
            .dim();
        if let Some(t) = trees.iter().find(|t| t.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: t.dim(),
            });
        }
        let c = c_factor(n_effective)?;
        Ok(Forest {
            trees,
            n_effective,
            c,
            psi,
            seed,
            d,
        })
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn num_trees(&self) -> usize {
        self.trees.len()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Sample size `n` in `c(n)`.
    pub fn n_effective(&self) -> usize {
        self.n_effective
    }

    pub fn psi(&self) -> Option<usize> {
        self.psi
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Mean path length over trees. Per-tree lengths are summed as integers,
    /// so the result does not depend on evaluation order.
    pub fn expected_path_length(&self, x: &[f64]) -> Result<f64> {
        check_point(x, self.d)?;
        Ok(self.expected_path_length_unchecked(x))
    }

    fn expected_path_length_unchecked(&self, x: &[f64]) -> f64 {
        let total: u64 = self.trees.iter().map(|t| t.route(x).1 as u64).sum();
        total as f64 / self.trees.len() as f64
    }

    pub fn score(&self, x: &[f64]) -> Result<ScoreReport> {
        let e = self.expected_path_length(x)?;
        Ok(ScoreReport {
            index: 0,
            expected_path_length: e,
            score: anomaly_score(e, self.c),
        })
    }

    /// Scores every row, in order.
    pub fn score_all(&self, data: &Dataset) -> Result<Vec<ScoreReport>> {
        self.score_range(data, 0)
    }

    fn score_range(&self, data: &Dataset, start: usize) -> Result<Vec<ScoreReport>> {
        if data.len() > start && data.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: data.dim(),
            });
        }
        Ok(par::map_indices(data.len() - start, |k| {
            let i = start + k;
            let e = self.expected_path_length_unchecked(data.row(i));
            ScoreReport {
                index: i,
                expected_path_length: e,
                score: anomaly_score(e, self.c),
            }
        }))
    }

    /// Re-scores the most recent points of `history` against the current
    /// trees. Reports keep their index into `history`.
    pub fn rescore_window(&self, history: &Dataset, window: Window) -> Result<Vec<ScoreReport>> {
        let start = match window {
            Window::All => 0,
            Window::Latest(0) => return Err(Error::invalid("window must be positive")),
            Window::Latest(k) => history.len().saturating_sub(k),
        };
        self.score_range(history, start)
    }

    /// Inserts points one at a time, in order, into every tree. The score
    /// normaliser keeps its training-time `n`.
    pub fn extend(&mut self, points: &Dataset) -> Result<()> {
        if points.is_empty() {
            return Ok(());
        }
        if points.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: points.dim(),
            });
        }
        for x in points.rows() {
            self.extend_one(x)?;
        }
        Ok(())
    }

    pub fn extend_one(&mut self, x: &[f64]) -> Result<()> {
        check_point(x, self.d)?;
        par::for_each_mut(&mut self.trees, |tree| {
            tree.extend_unchecked(x);
        });
        Ok(())
    }
}
