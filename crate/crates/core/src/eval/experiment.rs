use std::time::Instant;

use sha2::{Digest, Sha256};

use super::auc::auc;
use super::split::{kfold_split, stream_stages, StagePlan};
use crate::dataset::LabeledDataset;
use crate::decision::{DecisionMode, DecisionModel, DEFAULT_THRESHOLD};
use crate::error::Result;
use crate::forest::{Forest, ForestConfig, Window};

#[derive(Debug, Clone, PartialEq)]
pub struct StreamConfig {
    pub forest: ForestConfig,
    pub num_stages: usize,
    pub mode: DecisionMode,
    pub threshold: f64,
    /// Re-score only this many of the latest points after each stage
    /// (always at least the stage's new points); `None` re-scores all.
    pub window: Option<usize>,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self {
            forest: ForestConfig::default(),
            num_stages: 5,
            mode: DecisionMode::KMeans,
            threshold: DEFAULT_THRESHOLD,
            window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageResult {
    /// 1-based stage number.
    pub stage: usize,
    pub n_seen: usize,
    pub auc: f64,
    /// Batch training (stage 1) or extension time.
    pub train_seconds: f64,
    pub score_seconds: f64,
    pub flagged: usize,
    /// Flagged points whose ground truth is normal.
    pub false_alarms: usize,
    /// Label rule fitted on this stage's scores.
    pub decision: DecisionModel,
}

#[derive(Debug, Clone)]
pub struct StreamResult {
    pub plan: StagePlan,
    pub stages: Vec<StageResult>,
    pub forest: Forest,
}

/// Streams a labeled dataset in stratified stages: the first stage trains
/// the forest, every later stage extends it. After each stage the points
/// seen so far are re-scored and AUC is computed over all of them.
pub fn run_stream_experiment(
    dataset: &LabeledDataset,
    config: &StreamConfig,
) -> Result<StreamResult> {
    run_stream_experiment_with(dataset, config, |_, _| {})
}

/// As [`run_stream_experiment`], calling `observe` with each stage's result
/// and the forest as it stands after that stage.
pub fn run_stream_experiment_with<F>(
    dataset: &LabeledDataset,
    config: &StreamConfig,
    mut observe: F,
) -> Result<StreamResult>
where
    F: FnMut(&StageResult, &Forest),
{
    let plan = stream_stages(&dataset.labels, config.num_stages, config.forest.seed)?;
    let mut seen: Vec<usize> = Vec::with_capacity(dataset.len());
    let mut scores: Vec<f64> = Vec::with_capacity(dataset.len());
    let mut forest: Option<Forest> = None;
    let mut stages = Vec::with_capacity(plan.num_stages());

    for (s, batch) in plan.stages.iter().enumerate() {
        let new_points = dataset.data.select(batch);
        seen.extend_from_slice(batch);
        let history = dataset.data.select(&seen);

        let started = Instant::now();
        let model = match forest.as_mut() {
            None => forest.insert(Forest::train(&new_points, &config.forest)?),
            Some(f) => {
                f.extend(&new_points)?;
                f
            }
        };
        let train_seconds = started.elapsed().as_secs_f64();

        let started = Instant::now();
        let window = match config.window {
            None => Window::All,
            Some(w) => Window::Latest(w.max(batch.len())),
        };
        scores.resize(seen.len(), 0.0);
        for r in model.rescore_window(&history, window)? {
            scores[r.index] = r.score;
        }
        let score_seconds = started.elapsed().as_secs_f64();

        let labels: Vec<bool> = seen.iter().map(|&i| dataset.labels[i]).collect();
        let decision = DecisionModel::fit(config.mode, &scores, config.threshold)?;
        let flags = decision.assign_all(&scores);
        let flagged = flags.iter().filter(|l| l.is_anomaly()).count();
        let false_alarms = flags
            .iter()
            .zip(&labels)
            .filter(|(f, &truth)| f.is_anomaly() && !truth)
            .count();

        stages.push(StageResult {
            stage: s + 1,
            n_seen: seen.len(),
            auc: auc(&scores, &labels)?,
            train_seconds,
            score_seconds,
            flagged,
            false_alarms,
            decision,
        });
        observe(stages.last().expect("just pushed"), model);
    }

    Ok(StreamResult {
        plan,
        stages,
        forest: forest.expect("at least one stage"),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// `None` when the fold holds a single class.
    pub train_auc: Option<f64>,
    pub test_auc: Option<f64>,
    pub train_seconds: f64,
    pub score_seconds: f64,
}

/// Stratified k-fold evaluation: train on each fold's complement, report
/// in-sample AUC on it and out-of-sample AUC on the held-out fold.
pub fn run_cv_experiment(
    dataset: &LabeledDataset,
    config: &ForestConfig,
    folds: usize,
) -> Result<Vec<FoldResult>> {
    let splits = kfold_split(&dataset.labels, folds, config.seed)?;
    let mut out = Vec::with_capacity(splits.len());
    for (k, fold) in splits.iter().enumerate() {
        let train = dataset.select(&fold.train);
        let test = dataset.select(&fold.test);

        let started = Instant::now();
        let forest = Forest::train(&train.data, config)?;
        let train_seconds = started.elapsed().as_secs_f64();

        let started = Instant::now();
        let train_scores: Vec<f64> = forest.score_all(&train.data)?.iter().map(|r| r.score).collect();
        let test_scores: Vec<f64> = forest.score_all(&test.data)?.iter().map(|r| r.score).collect();
        let score_seconds = started.elapsed().as_secs_f64();

        out.push(FoldResult {
            fold: k + 1,
            n_train: train.len(),
            n_test: test.len(),
            train_auc: auc(&train_scores, &train.labels).ok(),
            test_auc: auc(&test_scores, &test.labels).ok(),
            train_seconds,
            score_seconds,
        });
    }
    Ok(out)
}

/// Short stable digest of any configuration's debug form.
pub fn config_hash<T: std::fmt::Debug>(config: &T) -> String {
    let digest = Sha256::digest(format!("{config:?}").as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// One line of an experiment table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub dataset: String,
    /// `fold` or `stage`.
    pub unit: &'static str,
    pub index: usize,
    /// `train`, `test` or `cumulative`.
    pub split: &'static str,
    pub n: usize,
    pub auc: Option<f64>,
    pub train_seconds: f64,
    pub score_seconds: f64,
    pub flagged: Option<usize>,
    pub config_hash: String,
}

impl ResultRow {
    pub fn from_stage(dataset: &str, stage: &StageResult, hash: &str) -> Self {
        ResultRow {
            dataset: dataset.to_string(),
            unit: "stage",
            index: stage.stage,
            split: "cumulative",
            n: stage.n_seen,
            auc: Some(stage.auc),
            train_seconds: stage.train_seconds,
            score_seconds: stage.score_seconds,
            flagged: Some(stage.flagged),
            config_hash: hash.to_string(),
        }
    }

    /// A train row and a test row.
    pub fn from_fold(dataset: &str, fold: &FoldResult, hash: &str) -> [Self; 2] {
        let row = |split, n, auc| ResultRow {
            dataset: dataset.to_string(),
            unit: "fold",
            index: fold.fold,
            split,
            n,
            auc,
            train_seconds: fold.train_seconds,
            score_seconds: fold.score_seconds,
            flagged: None,
            config_hash: hash.to_string(),
        };
        [
            row("train", fold.n_train, fold.train_auc),
            row("test", fold.n_test, fold.test_auc),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blob_with_outliers(seed: u64) -> LabeledDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..90 {
            rows.push(vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            labels.push(false);
        }
        for _ in 0..10 {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            rows.push(vec![sign * rng.random_range(4.0..6.0), rng.random_range(-6.0..6.0)]);
            labels.push(true);
        }
        LabeledDataset::new("blob", Dataset::from_rows(&rows).unwrap(), labels).unwrap()
    }

    fn small_config() -> StreamConfig {
        StreamConfig {
            forest: ForestConfig {
                num_trees: 20,
                subsample: Some(256),
                seed: 3,
            },
            ..StreamConfig::default()
        }
    }

    #[test]
    fn one_row_per_stage() {
        let ds = blob_with_outliers(1);
        let result = run_stream_experiment(&ds, &small_config()).unwrap();
        assert_eq!(result.stages.len(), 5);
        let n: Vec<usize> = result.stages.iter().map(|s| s.n_seen).collect();
        assert_eq!(n, vec![20, 40, 60, 80, 100]);
        assert!(result.stages.iter().all(|s| s.auc > 0.8));
        assert!(result.forest.trees().iter().all(|t| t.population() == 100));
    }

    #[test]
    fn single_stage_matches_batch() {
        let ds = blob_with_outliers(2);
        let cfg = StreamConfig {
            num_stages: 1,
            ..small_config()
        };
        let result = run_stream_experiment(&ds, &cfg).unwrap();
        let order = &result.plan.stages[0];
        let batch = Forest::train(&ds.data.select(order), &cfg.forest).unwrap();
        assert_eq!(result.forest, batch);
        let scores: Vec<f64> = batch
            .score_all(&ds.data.select(order))
            .unwrap()
            .iter()
            .map(|r| r.score)
            .collect();
        let labels: Vec<bool> = order.iter().map(|&i| ds.labels[i]).collect();
        assert_eq!(result.stages[0].auc, auc(&scores, &labels).unwrap());
    }

    #[test]
    fn windowed_rescoring_runs() {
        let ds = blob_with_outliers(3);
        let cfg = StreamConfig {
            window: Some(5),
            ..small_config()
        };
        let result = run_stream_experiment(&ds, &cfg).unwrap();
        assert_eq!(result.stages.len(), 5);
    }

    #[test]
    fn observer_sees_every_stage() {
        let ds = blob_with_outliers(4);
        let mut populations = Vec::new();
        run_stream_experiment_with(&ds, &small_config(), |s, f| {
            populations.push((s.stage, f.trees()[0].population()))
        })
        .unwrap();
        assert_eq!(populations, vec![(1, 20), (2, 40), (3, 60), (4, 80), (5, 100)]);
    }

    #[test]
    fn cross_validation_reports_every_fold() {
        let ds = blob_with_outliers(5);
        let folds = run_cv_experiment(&ds, &small_config().forest, 2).unwrap();
        assert_eq!(folds.len(), 2);
        for f in &folds {
            assert_eq!(f.n_train + f.n_test, 100);
            assert!(f.train_auc.unwrap() > 0.8);
            assert!(f.test_auc.unwrap() > 0.8);
        }
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config_hash(&small_config());
        assert_eq!(a.len(), 16);
        assert_eq!(a, config_hash(&small_config()));
        assert_ne!(a, config_hash(&StreamConfig::default()));
    }
}
