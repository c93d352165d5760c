//! Random draws for the Mondrian split clock, split dimension and split value.

use rand::Rng;
use rand_distr::Exp1;

use super::bbox::{linear_dimension, BoundingBox};
use crate::error::{Error, Result};

/// One sampled cut of a block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitDraw {
    /// Exponential waiting time added to the parent's split time.
    pub time_increment: f64,
    pub dim: usize,
    pub value: f64,
}

/// Draws `Exp(rate)`. A zero rate never fires and yields `+inf` without
/// consuming randomness.
pub fn sample_exponential<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> f64 {
    if rate > 0.0 {
        let e: f64 = rng.sample(Exp1);
        e / rate
    } else {
        f64::INFINITY
    }
}

/// Samples a cut of `bbox`: time from `Exp(λ)` with λ the linear
/// dimension, dimension proportional to side length, value uniform
/// within that side.
pub fn sample_split<R: Rng + ?Sized>(bbox: &BoundingBox, rng: &mut R) -> Result<SplitDraw> {
    draw_split(&bbox.min, &bbox.max, rng).ok_or(Error::DegenerateBox)
}

pub(crate) fn draw_split<R: Rng + ?Sized>(
    min: &[f64],
    max: &[f64],
    rng: &mut R,
) -> Option<SplitDraw> {
    let rate = linear_dimension(min, max);
    // also rejects NaN
    if rate.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return None;
    }
    let time_increment = sample_exponential(rate, rng);
    let dim = sample_proportional(min.len(), rate, |j| max[j] - min[j], rng);
    let value = sample_half_open(min[dim], max[dim], rng);
    Some(SplitDraw {
        time_increment,
        dim,
        value,
    })
}

/// Picks `j` with probability `weight(j) / total`. Zero-weight dimensions
/// are never returned.
pub(crate) fn sample_proportional<R, W>(d: usize, total: f64, weight: W, rng: &mut R) -> usize
where
    R: Rng + ?Sized,
    W: Fn(usize) -> f64,
{
    let target = rng.random::<f64>() * total;
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for j in 0..d {
        let w = weight(j);
        if w > 0.0 {
            cumulative += w;
            last_positive = j;
            if target < cumulative {
                return j;
            }
        }
    }
    // rounding left target at or past the final sum
    last_positive
}

/// Uniform on `(lo, hi]`, for `lo < hi`. Excluding `lo` keeps both sides
/// of a cut nonempty under the `x < p` / `x >= p` partition.
pub(crate) fn sample_half_open<R: Rng + ?Sized>(lo: f64, hi: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let p = hi - (hi - lo) * u;
    if p > lo {
        p
    } else {
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bbox(min: &[f64], max: &[f64]) -> BoundingBox {
        BoundingBox {
            min: min.to_vec(),
            max: max.to_vec(),
        }
    }

    #[test]
    fn dimension_frequency_follows_side_length() {
        let b = bbox(&[0.0, 0.0], &[1.0, 3.0]);
        assert_eq!(b.linear_dimension(), 4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 40_000;
        let second = (0..n)
            .filter(|_| sample_split(&b, &mut rng).unwrap().dim == 1)
            .count();
        let frac = second as f64 / n as f64;
        // binomial standard error is ~0.0022
        assert!((frac - 0.75).abs() < 0.01, "frac = {frac}");
    }

    #[test]
    fn zero_width_dimension_never_chosen() {
        let b = bbox(&[0.0, 5.0], &[1.0, 5.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10_000 {
            let s = sample_split(&b, &mut rng).unwrap();
            assert_eq!(s.dim, 0);
            assert!(s.value > 0.0 && s.value <= 1.0);
            assert!(s.time_increment >= 0.0);
        }
    }

    #[test]
    fn degenerate_box_is_an_error() {
        let b = bbox(&[2.0, 2.0], &[2.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(matches!(sample_split(&b, &mut rng), Err(Error::DegenerateBox)));
    }

    #[test]
    fn exponential_mean_matches_inverse_rate() {
        // [0,2]x[0,2] has rate 4, so E[e] = 1/4 and sd = 1/4
        let b = bbox(&[0.0, 0.0], &[2.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_split(&b, &mut rng).unwrap().time_increment)
            .sum::<f64>()
            / n as f64;
        let se = 0.25 / (n as f64).sqrt();
        assert!((mean - 0.25).abs() < 3.0 * se, "mean = {mean}");
    }

    #[test]
    fn zero_rate_never_fires() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(sample_exponential(0.0, &mut rng), f64::INFINITY);
    }

    #[test]
    fn half_open_interval_excludes_lower_end() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let lo = 1.0_f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        for _ in 0..100 {
            assert_eq!(sample_half_open(lo, hi, &mut rng), hi);
        }
        for _ in 0..1000 {
            let p = sample_half_open(-3.0, 7.0, &mut rng);
            assert!(p > -3.0 && p <= 7.0);
        }
    }
}
