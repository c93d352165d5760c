use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// A partition of a labeled dataset into successive stream batches. Stage
/// 0 is the initial training batch; indices within a stage are in arrival
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagePlan {
    pub stages: Vec<Vec<usize>>,
}

impl StagePlan {
    pub fn num_stages(&self) -> usize {
        self.stages.len()
    }

    /// Indices of stages `0..=stage`, in arrival order.
    pub fn seen_through(&self, stage: usize) -> Vec<usize> {
        self.stages[..=stage].concat()
    }
}

/// Shuffles each class and deals it round-robin into `k` buckets, normals
/// continuing where the anomalies stopped so bucket sizes differ by at most
/// one and every bucket's anomaly count is within one of the others.
fn deal_stratified(labels: &[bool], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut anomalies: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut normals: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    anomalies.shuffle(rng);
    normals.shuffle(rng);
    let mut buckets = vec![Vec::with_capacity(labels.len() / k + 1); k];
    for (slot, i) in anomalies.into_iter().chain(normals).enumerate() {
        buckets[slot % k].push(i);
    }
    buckets
}

/// Stratified `k`-fold split. Test folds are disjoint and cover every index;
/// each train set is the complement of its test fold. Indices are sorted.
pub fn kfold_split(labels: &[bool], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(Error::invalid(format!("k = {k}; need at least 2 folds")));
    }
    if k > labels.len() {
        return Err(Error::invalid(format!(
            "{k} folds requested for {} points",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let buckets = deal_stratified(labels, k, &mut rng);
    let mut fold_of = vec![0usize; labels.len()];
    for (f, bucket) in buckets.iter().enumerate() {
        for &i in bucket {
            fold_of[i] = f;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train) = (0..labels.len()).partition(|&i| fold_of[i] == f);
            Fold { train, test }
        })
        .collect())
}

/// Stratified split into `num_stages` stream batches with equal anomaly
/// counts (within one). Needs at least one anomaly and one normal point per
/// stage.
pub fn stream_stages(labels: &[bool], num_stages: usize, seed: u64) -> Result<StagePlan> {
    if num_stages == 0 {
        return Err(Error::invalid("need at least one stage"));
    }
    let anomalies = labels.iter().filter(|&&l| l).count();
    let normals = labels.len() - anomalies;
    if anomalies < num_stages || normals < num_stages {
        return Err(Error::Infeasible(format!(
            "{anomalies} anomalies and {normals} normal points cannot be stratified into {num_stages} stages"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stages = deal_stratified(labels, num_stages, &mut rng);
    for stage in &mut stages {
        stage.shuffle(&mut rng);
    }
    Ok(StagePlan { stages })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize, anomalies: usize) -> Vec<bool> {
        (0..n).map(|i| i < anomalies).collect()
    }

    #[test]
    fn singleton_folds() {
        let folds = kfold_split(&labels(10, 4), 10, 0).unwrap();
        assert_eq!(folds.len(), 10);
        assert!(folds.iter().all(|f| f.test.len() == 1 && f.train.len() == 9));
    }

    #[test]
    fn stratified_two_folds() {
        let l = labels(10, 4);
        for seed in 0..20 {
            for f in kfold_split(&l, 2, seed).unwrap() {
                assert_eq!(f.test.iter().filter(|&&i| l[i]).count(), 2);
            }
        }
    }

    #[test]
    fn folds_partition_the_index_set() {
        let l = labels(37, 6);
        let folds = kfold_split(&l, 5, 3).unwrap();
        let mut all: Vec<usize> = folds.iter().flat_map(|f| f.test.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..37).collect::<Vec<_>>());
        for f in &folds {
            assert_eq!(f.train.len() + f.test.len(), 37);
            assert!(f.train.iter().all(|i| !f.test.contains(i)));
        }
        assert_eq!(folds, kfold_split(&l, 5, 3).unwrap());
    }

    #[test]
    fn fold_errors() {
        assert!(kfold_split(&labels(3, 1), 4, 0).is_err());
        assert!(kfold_split(&labels(3, 1), 1, 0).is_err());
    }

    #[test]
    fn five_even_stages() {
        let l = labels(100, 10);
        let plan = stream_stages(&l, 5, 1).unwrap();
        for stage in &plan.stages {
            assert_eq!(stage.len(), 20);
            assert_eq!(stage.iter().filter(|&&i| l[i]).count(), 2);
        }
    }

    #[test]
    fn uneven_anomaly_counts_stay_within_one() {
        let l = labels(60, 9);
        let plan = stream_stages(&l, 5, 2).unwrap();
        let counts: Vec<usize> = plan
            .stages
            .iter()
            .map(|s| s.iter().filter(|&&i| l[i]).count())
            .collect();
        assert!(counts.iter().all(|&c| c == 1 || c == 2), "{counts:?}");
        assert_eq!(counts.iter().sum::<usize>(), 9);
    }

    #[test]
    fn too_few_anomalies_is_infeasible() {
        assert!(matches!(stream_stages(&labels(50, 3), 5, 0), Err(Error::Infeasible(_))));
        assert!(matches!(stream_stages(&labels(50, 0), 1, 0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn accumulation_is_a_prefix_union() {
        let l = labels(30, 5);
        let plan = stream_stages(&l, 5, 4).unwrap();
        let seen = plan.seen_through(2);
        assert_eq!(seen.len(), 18);
        let mut all = plan.seen_through(4);
        all.sort_unstable();
        assert_eq!(all, (0..30).collect::<Vec<_>>());
    }
}
