use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use imforest::bench::{default_threads, median_doubling_ratio, run_scaling, write_scaling, Phase, ScalingConfig};
use imforest::eval::{auc, config_hash, run_cv_experiment, run_stream_experiment_with, ResultRow, StreamConfig};
use imforest::io::export::{write_grid, write_grid_header, write_result_rows, write_scores, Grid};
use imforest::io::{
    gen_synthetic, load_csv, load_model, save_model, write_labeled_csv, CsvSchema, LabelColumn,
    Loaded, SyntheticSpec,
};
use imforest::{DecisionModel, Error, Forest, ForestConfig, LabeledDataset, Result};

use crate::{BenchArgs, CsvArgs, CvArgs, FitArgs, ForestArgs, GenerateArgs, ScoreArgs, SourceArgs, StreamArgs};

fn schema(args: &CsvArgs) -> Result<CsvSchema> {
    let delimiter = u8::try_from(args.delimiter)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| Error::InvalidParameter(format!("delimiter `{}` is not ASCII", args.delimiter)))?;
    let label_column = match (&args.label_column, args.label_index) {
        (Some(name), _) => Some(LabelColumn::Name(name.clone())),
        (None, Some(i)) => Some(LabelColumn::Index(i)),
        (None, None) => None,
    };
    Ok(CsvSchema {
        delimiter,
        header: !args.no_header,
        label_column,
    })
}

/// The dataset and a name for result tables.
fn load_source(source: &SourceArgs, seed: u64) -> Result<(Loaded, String)> {
    match (&source.data, source.synthetic) {
        (_, Some(kind)) => {
            let ds = gen_synthetic(&SyntheticSpec::standard(kind, seed))?;
            let name = ds.name.clone();
            Ok((Loaded::Labeled(ds), name))
        }
        (Some(path), None) => {
            let loaded = load_csv(path, &schema(&source.csv)?)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((loaded, name))
        }
        (None, None) => Err(Error::InvalidParameter("pass --data or --synthetic".into())),
    }
}

fn load_labeled(source: &SourceArgs, seed: u64) -> Result<(LabeledDataset, String)> {
    let (loaded, name) = load_source(source, seed)?;
    let ds = loaded.into_labeled().map_err(|_| {
        Error::InvalidParameter("this command needs labels: pass --label-column or --label-index".into())
    })?;
    Ok((ds, name))
}

fn forest_config(args: &ForestArgs) -> ForestConfig {
    ForestConfig {
        num_trees: args.trees as usize,
        subsample: (args.psi > 0).then_some(args.psi),
        seed: args.seed,
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn finish(mut w: Box<dyn Write>) -> Result<()> {
    w.flush()?;
    Ok(())
}

pub fn fit(args: FitArgs) -> Result<()> {
    DecisionModel::threshold(args.threshold)?;
    let config = forest_config(&args.forest);
    let (loaded, name) = load_source(&args.source, args.forest.seed)?;
    let data = loaded.data();
    let forest = Forest::train(data, &config)?;
    let reports = forest.score_all(data)?;
    let scores: Vec<f64> = reports.iter().map(|r| r.score).collect();
    let decision = DecisionModel::fit(args.mode, &scores, args.threshold)?;
    save_model(&args.model, &forest, Some(&decision))?;

    let mut out = output(args.out.as_deref())?;
    write_scores(&mut out, &reports, &decision)?;
    finish(out)?;

    let flagged = decision.assign_all(&scores).iter().filter(|l| l.is_anomaly()).count();
    eprint!(
        "{name}: {} points, d={}, {} trees, n={}; {flagged} flagged ({})",
        data.len(),
        data.dim(),
        forest.num_trees(),
        forest.n_effective(),
        decision.mode()
    );
    if let Loaded::Labeled(ds) = &loaded {
        if let Ok(a) = auc(&scores, &ds.labels) {
            eprint!("; AUC {a:.4}");
        }
    }
    eprintln!();
    Ok(())
}

pub fn score(args: ScoreArgs) -> Result<()> {
    let saved = load_model(&args.model)?;
    let loaded = load_csv(&args.data, &schema(&args.csv)?)?;
    let reports = saved.forest.score_all(loaded.data())?;
    let scores: Vec<f64> = reports.iter().map(|r| r.score).collect();
    let decision = match args.mode {
        Some(mode) if !scores.is_empty() => DecisionModel::fit(mode, &scores, args.threshold)?,
        Some(_) => DecisionModel::threshold(args.threshold)?,
        None => match saved.decision {
            Some(d) => d,
            None => DecisionModel::threshold(args.threshold)?,
        },
    };
    let mut out = output(args.out.as_deref())?;
    write_scores(&mut out, &reports, &decision)?;
    finish(out)
}

pub fn stream(args: StreamArgs) -> Result<()> {
    DecisionModel::threshold(args.threshold)?;
    let (ds, name) = load_labeled(&args.source, args.forest.seed)?;
    let grid = match args.grid {
        Some(_) if ds.data.dim() != 2 => {
            return Err(Error::InvalidParameter(format!(
                "--grid needs 2-D data; this dataset has {} dimensions",
                ds.data.dim()
            )))
        }
        Some(n) => Some(Grid::around(&ds.data, n as usize, 0.1)?),
        None => None,
    };
    let config = StreamConfig {
        forest: forest_config(&args.forest),
        num_stages: args.stages as usize,
        mode: args.mode,
        threshold: args.threshold,
        window: args.window.map(|w| w as usize),
    };

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
    }
    let mut grid_out = match (&grid, &args.out) {
        (Some(_), Some(dir)) => {
            let mut w = BufWriter::new(File::create(dir.join("grid.csv"))?);
            write_grid_header(&mut w)?;
            Some(w)
        }
        _ => None,
    };
    let mut grid_error = None;
    let result = run_stream_experiment_with(&ds, &config, |stage, forest| {
        if let (Some(g), Some(w)) = (&grid, grid_out.as_mut()) {
            if grid_error.is_none() {
                grid_error = write_grid(w, stage.stage, g, forest, &stage.decision).err();
            }
        }
    })?;
    if let Some(err) = grid_error {
        return Err(err);
    }
    if let Some(mut w) = grid_out {
        w.flush()?;
    }

    let hash = config_hash(&config);
    let rows: Vec<ResultRow> = result
        .stages
        .iter()
        .map(|s| ResultRow::from_stage(&name, s, &hash))
        .collect();
    let mut out = output(args.out.as_ref().map(|d| d.join("stages.csv")).as_deref())?;
    write_result_rows(&mut out, &rows)?;
    finish(out)?;
    for s in &result.stages {
        eprintln!(
            "stage {}: n={} AUC {:.4} flagged {} (false alarms {})",
            s.stage, s.n_seen, s.auc, s.flagged, s.false_alarms
        );
    }
    Ok(())
}

pub fn cv(args: CvArgs) -> Result<()> {
    let (ds, name) = load_labeled(&args.source, args.forest.seed)?;
    let config = forest_config(&args.forest);
    let folds = run_cv_experiment(&ds, &config, args.folds as usize)?;
    let hash = config_hash(&(&config, args.folds));
    let rows: Vec<ResultRow> = folds
        .iter()
        .flat_map(|f| ResultRow::from_fold(&name, f, &hash))
        .collect();
    let mut out = output(args.out.as_deref())?;
    write_result_rows(&mut out, &rows)?;
    finish(out)?;

    let mean = |pick: fn(&imforest::eval::FoldResult) -> Option<f64>| {
        let v: Vec<f64> = folds.iter().filter_map(pick).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    if let (Some(train), Some(test)) = (mean(|f| f.train_auc), mean(|f| f.test_auc)) {
        eprintln!("{name}: mean train AUC {train:.4}, mean test AUC {test:.4}");
    }
    Ok(())
}

pub fn bench(args: BenchArgs) -> Result<()> {
    let threads = match args.bench_threads {
        Some(1) => vec![1],
        Some(t) => vec![1, t as usize],
        None => default_threads(),
    };
    let config = ScalingConfig {
        sizes: args.sizes,
        d: args.dim as usize,
        num_trees: args.trees as usize,
        runs: args.runs as usize,
        threads,
        seed: args.seed,
    };
    let rows = run_scaling(&config)?;
    let mut out = output(args.out.as_deref())?;
    write_scaling(&mut out, &rows)?;
    finish(out)?;
    let mut threads: Vec<usize> = rows.iter().map(|r| r.threads).collect();
    threads.dedup();
    for t in threads {
        if let Some(r) = median_doubling_ratio(&rows, Phase::Train, t, &config.sizes) {
            eprintln!("{t} thread(s): median train doubling ratio {r:.3}");
        }
    }
    Ok(())
}

pub fn generate(args: GenerateArgs) -> Result<()> {
    let ds = gen_synthetic(&SyntheticSpec::standard(args.synthetic, args.seed))?;
    let mut out = output(args.out.as_deref())?;
    write_labeled_csv(&mut out, &ds)?;
    finish(out)
}
