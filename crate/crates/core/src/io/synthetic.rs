//! Two-dimensional synthetic benchmarks: a cluster of inliers plus
//! outliers scattered uniformly over a box with the inlier core cut out.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{Dataset, LabeledDataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// One isotropic Gaussian, truncated at 3σ.
    GaussianBlob,
    /// A large and a small Gaussian blob.
    TwoBlobs,
    /// An annulus; outliers also fill its hole.
    Ring,
    /// A jittered square lattice.
    GridCluster,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 4] = [
        SyntheticKind::GaussianBlob,
        SyntheticKind::Ring,
        SyntheticKind::TwoBlobs,
        SyntheticKind::GridCluster,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SyntheticKind::GaussianBlob => "gaussian-blob",
            SyntheticKind::TwoBlobs => "two-blobs",
            SyntheticKind::Ring => "ring",
            SyntheticKind::GridCluster => "grid-cluster",
        }
    }

    /// Whether `x` lies in the inlier core, which outliers avoid.
    fn in_core(self, x: [f64; 2]) -> bool {
        let r = |c: [f64; 2]| ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt();
        match self {
            SyntheticKind::GaussianBlob => r([0.0, 0.0]) <= 3.5,
            SyntheticKind::TwoBlobs => r([-1.5, -1.5]) <= 3.5 || r([3.0, 3.0]) <= 1.75,
            SyntheticKind::Ring => (1.5..=4.5).contains(&r([0.0, 0.0])),
            SyntheticKind::GridCluster => x[0].abs() <= 2.5 && x[1].abs() <= 2.5,
        }
    }

    /// Half-width of a centred square holding the whole core.
    fn core_extent(self) -> f64 {
        match self {
            SyntheticKind::GaussianBlob => 3.5,
            SyntheticKind::TwoBlobs => 5.0,
            SyntheticKind::Ring => 4.5,
            SyntheticKind::GridCluster => 2.5,
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    /// Accepts the generator names, or `a`-`d` for the four standard sets.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian-blob" | "a" => SyntheticKind::GaussianBlob,
            "ring" | "b" => SyntheticKind::Ring,
            "two-blobs" | "c" => SyntheticKind::TwoBlobs,
            "grid-cluster" | "d" => SyntheticKind::GridCluster,
            other => return Err(Error::invalid(format!("unknown synthetic set `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    pub inliers: usize,
    pub outliers: usize,
    /// Outliers are uniform on `[lo, hi]^2` minus the inlier core.
    pub outlier_box: (f64, f64),
    pub seed: u64,
}

impl SyntheticSpec {
    /// The standard set for `kind`: 255 inliers for the Gaussian blob, 100
    /// for the others, and 45 outliers each.
    pub fn standard(kind: SyntheticKind, seed: u64) -> Self {
        let inliers = match kind {
            SyntheticKind::GaussianBlob => 255,
            _ => 100,
        };
        let half = match kind {
            SyntheticKind::TwoBlobs => 7.0,
            _ => 6.0,
        };
        Self {
            kind,
            inliers,
            outliers: 45,
            outlier_box: (-half, half),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.inliers == 0 {
            return Err(Error::invalid("synthetic set needs at least one inlier"));
        }
        let (lo, hi) = self.outlier_box;
        let extent = self.kind.core_extent();
        if !(lo.is_finite() && hi.is_finite()) || lo > -extent || hi < extent {
            return Err(Error::invalid(format!(
                "outlier box [{lo}, {hi}] must enclose the {} core [-{extent}, {extent}]",
                self.kind
            )));
        }
        if self.outliers > 0 && hi - lo <= 2.0 * extent {
            return Err(Error::invalid("outlier box leaves no room outside the core"));
        }
        Ok(())
    }
}

/// Generates inliers (label 0) followed by outliers (label 1).
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.inliers + spec.outliers;
    let mut values = Vec::with_capacity(2 * n);

    for k in 0..spec.inliers {
        let p = sample_inlier(spec.kind, k, spec.inliers, &mut rng);
        values.extend_from_slice(&p);
    }
    let (lo, hi) = spec.outlier_box;
    for _ in 0..spec.outliers {
        let p = loop {
            let p = [rng.random_range(lo..=hi), rng.random_range(lo..=hi)];
            if !spec.kind.in_core(p) {
                break p;
            }
        };
        values.extend_from_slice(&p);
    }
    let labels = (0..n).map(|i| i >= spec.inliers).collect();
    LabeledDataset::new(spec.kind.name(), Dataset::new(values, 2)?, labels)
}

fn truncated_normal(rng: &mut ChaCha8Rng, center: [f64; 2], sigma: f64) -> [f64; 2] {
    let normal = Normal::new(0.0, sigma).expect("positive sigma");
    loop {
        let dx = normal.sample(rng);
        let dy = normal.sample(rng);
        if dx * dx + dy * dy <= 9.0 * sigma * sigma {
            return [center[0] + dx, center[1] + dy];
        }
    }
}

fn sample_inlier(kind: SyntheticKind, k: usize, count: usize, rng: &mut ChaCha8Rng) -> [f64; 2] {
    match kind {
        SyntheticKind::GaussianBlob => truncated_normal(rng, [0.0, 0.0], 1.0),
        SyntheticKind::TwoBlobs => {
            // three quarters in the large blob
            if k < count * 3 / 4 {
                truncated_normal(rng, [-1.5, -1.5], 1.0)
            } else {
                truncated_normal(rng, [3.0, 3.0], 0.5)
            }
        }
        SyntheticKind::Ring => {
            let angle = rng.random_range(0.0..TAU);
            let radius = rng.random_range(2.5..3.5);
            [radius * angle.cos(), radius * angle.sin()]
        }
        SyntheticKind::GridCluster => {
            let side = (count as f64).sqrt().ceil() as usize;
            let step = 4.0 / side.max(2) as f64;
            let (i, j) = (k % side, k / side);
            let jitter = Normal::new(0.0, step / 8.0).expect("positive sigma");
            let at = |c: usize| -2.0 + step * (c as f64 + 0.5);
            [
                (at(i) + jitter.sample(rng)).clamp(-2.0, 2.0),
                (at(j) + jitter.sample(rng)).clamp(-2.0, 2.0),
            ]
        }
    }
}

/// `n` points uniform on `[0, 1]^d`.
pub fn uniform_dataset(n: usize, d: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n * d).map(|_| rng.random::<f64>()).collect();
    Dataset::new(values, d).expect("uniform values are finite")
}
