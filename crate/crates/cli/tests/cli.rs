use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn imforest(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_imforest"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn fit_exports_one_row_per_point_and_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = imforest(
        &["fit", "--synthetic", "a", "--seed", "7", "--model", "m.imf", "--out", "s.csv"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let scores = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert_eq!(scores.lines().count(), 301);
    assert_eq!(scores.lines().next().unwrap(), "index,score,label,mode");
    assert!(fs::read_to_string(dir.path().join("m.imf"))
        .unwrap()
        .starts_with("imforest-model 1\n"));
}

#[test]
fn fit_is_byte_identical_under_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a.csv", "b.csv"] {
        let out = imforest(
            &["fit", "--synthetic", "ring", "--seed", "3", "--model", "m.imf", "--out", name],
            dir.path(),
        );
        assert_eq!(code(&out), 0);
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn scoring_the_training_file_reproduces_the_fit_export() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&imforest(&["generate", "--synthetic", "b", "--seed", "2", "--out", "d.csv"], p)), 0);
    let fit = imforest(
        &["fit", "--data", "d.csv", "--label-column", "label", "--mode", "kmeans", "--model", "m.imf", "--out", "fit.csv"],
        p,
    );
    assert_eq!(code(&fit), 0, "{}", stderr(&fit));
    let score = imforest(
        &["score", "--model", "m.imf", "--data", "d.csv", "--label-column", "label", "--out", "score.csv"],
        p,
    );
    assert_eq!(code(&score), 0, "{}", stderr(&score));
    assert_eq!(fs::read(p.join("fit.csv")).unwrap(), fs::read(p.join("score.csv")).unwrap());
}

#[test]
fn score_rejects_dimension_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    imforest(&["fit", "--synthetic", "a", "--model", "m.imf", "--out", "s.csv"], p);
    fs::write(p.join("three.csv"), "a,b,c\n1,2,3\n").unwrap();
    let out = imforest(&["score", "--model", "m.imf", "--data", "three.csv"], p);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("dimension"), "{}", stderr(&out));
}

#[test]
fn empty_points_file_gives_empty_export() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    imforest(&["fit", "--synthetic", "a", "--model", "m.imf", "--out", "s.csv"], p);
    fs::write(p.join("empty.csv"), "x,y\n").unwrap();
    let out = imforest(&["score", "--model", "m.imf", "--data", "empty.csv"], p);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "index,score,label,mode\n");
}

#[test]
fn corrupted_model_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    imforest(&["fit", "--synthetic", "a", "--trees", "3", "--model", "m.imf", "--out", "s.csv"], p);
    let mut text = fs::read_to_string(p.join("m.imf")).unwrap();
    text = text.replacen("dim 2", "dim 3", 1);
    fs::write(p.join("m.imf"), text).unwrap();
    fs::write(p.join("pts.csv"), "x,y\n0,0\n").unwrap();
    let out = imforest(&["score", "--model", "m.imf", "--data", "pts.csv"], p);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("checksum"), "{}", stderr(&out));
}

#[test]
fn invalid_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for args in [
        &["fit", "--synthetic", "a", "--trees", "0", "--model", "m"][..],
        &["fit", "--model", "m"],
        &["fit", "--synthetic", "a", "--threshold", "1.5", "--model", "m"],
        &["stream", "--synthetic", "a", "--stages", "0"],
        &["stream", "--synthetic", "a", "--grid", "10"],
        &["fit", "--synthetic", "nope", "--model", "m"],
    ] {
        let out = imforest(args, p);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn stream_writes_stage_rows_and_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let out = imforest(
        &["stream", "--synthetic", "a", "--trees", "20", "--grid", "200", "--out", "run"],
        p,
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let stages = fs::read_to_string(p.join("run/stages.csv")).unwrap();
    let rows: Vec<&str> = stages.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    for (k, row) in rows.iter().enumerate() {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[2], (k + 1).to_string());
        let auc: f64 = cells[5].parse().unwrap();
        let train: f64 = cells[6].parse().unwrap();
        assert!(auc > 0.5 && train >= 0.0);
    }
    let grid = fs::read_to_string(p.join("run/grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 5 * 200 * 200);
}

#[test]
fn grid_on_non_planar_data_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let mut csv = String::from("a,b,c,label\n");
    for i in 0..40 {
        csv.push_str(&format!("{i},{},{},{}\n", i % 7, i % 3, u8::from(i % 8 == 0)));
    }
    fs::write(p.join("d3.csv"), csv).unwrap();
    let out = imforest(
        &["stream", "--data", "d3.csv", "--label-column", "label", "--grid", "50", "--out", "run"],
        p,
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("2-D"));
}

#[test]
fn infeasible_stratification_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("d.csv"), "x,label\n1,0\n2,0\n3,0\n4,0\n5,0\n6,0\n9,1\n").unwrap();
    let out = imforest(&["stream", "--data", "d.csv", "--label-column", "label"], p);
    assert_eq!(code(&out), 4, "{}", stderr(&out));
}

#[test]
fn unparseable_cell_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("bad.csv"), "x,y\n1,2\n3,NaN\n").unwrap();
    let out = imforest(&["fit", "--data", "bad.csv", "--model", "m"], p);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("row 3"), "{}", stderr(&out));
}

#[test]
fn cv_reports_train_and_test_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = imforest(&["cv", "--synthetic", "c", "--trees", "10", "--folds", "3"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 3);
    assert_eq!(text.lines().filter(|l| l.contains(",test,")).count(), 3);
}

#[test]
fn bench_reports_every_size_and_phase() {
    let dir = tempfile::tempdir().unwrap();
    let out = imforest(
        &["bench", "--sizes", "256,512", "--trees", "2", "--runs", "2", "--bench-threads", "2"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    let threads = if cfg!(feature = "parallel") { 2 } else { 1 };
    assert_eq!(rows.len(), threads * 3 * 2);
    assert!(rows.iter().filter(|r| r.contains(",512,")).all(|r| !r.ends_with(',')));
}

#[test]
fn generate_round_trips_through_fit() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let out = imforest(&["generate", "--synthetic", "grid-cluster", "--out", "g.csv"], p);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(p.join("g.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x1,x2,label");
    assert_eq!(text.lines().count(), 146);
}
