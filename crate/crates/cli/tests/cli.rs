//! End-to-end tests of the command-line interface: exit codes, file
//! outputs, determinism, and config/manifest handling.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dga_impute::autoenc::{known_error, AutoencoderModel};
use dga_impute::data::read_records;

const BIN: &str = env!("CARGO_BIN_EXE_dga-impute");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("failed to spawn dga-impute")
}

fn run_ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn assert_exit_code(args: &[&str], expected: i32) {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(expected),
        "command {args:?}: stderr = {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_exits_zero_everywhere() {
    for args in [
        vec!["--help"],
        vec!["gen", "--help"],
        vec!["train", "--help"],
        vec!["train", "ae", "--help"],
        vec!["train", "clf", "--help"],
        vec!["impute", "--help"],
        vec!["bench", "--help"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("--"), "{args:?} help should document flags");
    }
}

#[test]
fn gen_writes_expected_record_count_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d1 = dir.path().join("d1");
    let d2 = dir.path().join("d2");
    run_ok(&["gen", "--n", "120", "--seed", "7", "--out", path_str(&d1)]);
    run_ok(&["gen", "--n", "120", "--seed", "7", "--out", path_str(&d2)]);
    let a = fs::read_to_string(d1.join("data.csv")).unwrap();
    assert_eq!(a.lines().count(), 121, "header + 120 records");
    let b = fs::read_to_string(d2.join("data.csv")).unwrap();
    assert_eq!(a, b, "same flags must give identical files");
    assert_eq!(
        fs::read_to_string(d1.join("rules.txt")).unwrap(),
        fs::read_to_string(d2.join("rules.txt")).unwrap()
    );
    assert!(d1.join("manifest.txt").exists());
}

#[test]
fn gen_with_missing_writes_truth_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    run_ok(&[
        "gen", "--n", "30", "--seed", "2", "--missing-k", "3", "--out", path_str(&out),
    ]);
    let data = read_records(out.join("data.csv")).unwrap();
    let truth = read_records(out.join("truth.csv")).unwrap();
    assert_eq!(data.len(), 30);
    assert!(data.records.iter().all(|r| r.missing_count() == 3));
    assert!(truth.records.iter().all(|r| r.is_complete()));
}

#[test]
fn gen_rejects_negative_count_with_usage_exit() {
    assert_exit_code(&["gen", "--n", "-1", "--out", "/tmp/never"], 2);
}

#[test]
fn gen_requires_out() {
    assert_exit_code(&["gen", "--n", "5"], 2);
}

#[test]
fn flags_win_over_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    let out = dir.path().join("d");
    fs::write(&cfg, "n=10\nseed=1\n").unwrap();
    run_ok(&[
        "gen", "--config", path_str(&cfg), "--n", "25", "--out", path_str(&out),
    ]);
    let data = fs::read_to_string(out.join("data.csv")).unwrap();
    assert_eq!(data.lines().count(), 26, "the flag value 25 must win over config 10");
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    assert!(manifest.contains("n=25"));
    assert!(manifest.contains("seed=1"), "config seed must apply");
}

#[test]
fn config_with_unknown_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    fs::write(&cfg, "bogus_key=1\n").unwrap();
    assert_exit_code(
        &["gen", "--config", path_str(&cfg), "--n", "5", "--out", "/tmp/never"],
        2,
    );
}

fn make_dataset(dir: &Path, n: usize, seed: u64, missing_k: usize) -> std::path::PathBuf {
    let out = dir.join(format!("data-{seed}-{missing_k}"));
    let mut args = vec![
        "gen".to_string(),
        "--n".into(),
        n.to_string(),
        "--seed".into(),
        seed.to_string(),
        "--out".into(),
        out.display().to_string(),
    ];
    if missing_k > 0 {
        args.push("--missing-k".into());
        args.push(missing_k.to_string());
    }
    let args: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    run_ok(&args);
    out
}

#[test]
fn train_ae_model_round_trips_and_epoch_zero_is_seeded_init() {
    let dir = tempfile::tempdir().unwrap();
    let data = make_dataset(dir.path(), 150, 3, 0);
    let model = dir.path().join("ae.model");
    run_ok(&[
        "train", "ae",
        "--data", path_str(&data.join("data.csv")),
        "--out", path_str(&model),
        "--epochs", "30",
        "--seed", "1",
    ]);
    let loaded = AutoencoderModel::load(&model).unwrap();
    assert_eq!(loaded.width(), 10);
    assert!(model.with_extension("loss.csv").exists());
    assert!(model.with_extension("manifest.txt").exists());

    // epochs = 0: two runs with one seed give byte-identical untrained models
    let m0a = dir.path().join("a0.model");
    let m0b = dir.path().join("b0.model");
    for m in [&m0a, &m0b] {
        run_ok(&[
            "train", "ae",
            "--data", path_str(&data.join("data.csv")),
            "--out", path_str(m),
            "--epochs", "0",
            "--seed", "9",
        ]);
    }
    assert_eq!(fs::read(&m0a).unwrap(), fs::read(&m0b).unwrap());
    let loss = fs::read_to_string(m0a.with_extension("loss.csv")).unwrap();
    assert_eq!(loss.lines().count(), 1, "loss trace must be empty at epochs 0");
}

#[test]
fn train_clf_without_usable_labels_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // masked records cannot train the classifier
    let data = make_dataset(dir.path(), 60, 5, 2);
    let model = dir.path().join("clf.model");
    let out = run(&[
        "train", "clf",
        "--data", path_str(&data.join("data.csv")),
        "--out", path_str(&model),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error:"), "stderr: {stderr}");
}

#[test]
fn impute_identity_when_nothing_is_missing() {
    let dir = tempfile::tempdir().unwrap();
    let data = make_dataset(dir.path(), 150, 3, 0);
    let model = dir.path().join("ae.model");
    run_ok(&[
        "train", "ae",
        "--data", path_str(&data.join("data.csv")),
        "--out", path_str(&model),
        "--epochs", "50",
    ]);
    let completed = dir.path().join("completed.csv");
    run_ok(&[
        "impute",
        "--model", path_str(&model),
        "--input", path_str(&data.join("data.csv")),
        "--out", path_str(&completed),
    ]);
    assert_eq!(
        fs::read(data.join("data.csv")).unwrap(),
        fs::read(&completed).unwrap(),
        "no-missing input must round-trip byte-identically"
    );
}

#[test]
fn impute_deterministic_and_report_known_error_recomputable() {
    let dir = tempfile::tempdir().unwrap();
    let train = make_dataset(dir.path(), 200, 3, 0);
    let test = make_dataset(dir.path(), 25, 8, 2);
    let model_path = dir.path().join("ae.model");
    run_ok(&[
        "train", "ae",
        "--data", path_str(&train.join("data.csv")),
        "--out", path_str(&model_path),
        "--epochs", "400",
    ]);
    let out1 = dir.path().join("c1.csv");
    let out2 = dir.path().join("c2.csv");
    for out in [&out1, &out2] {
        run_ok(&[
            "impute",
            "--model", path_str(&model_path),
            "--input", path_str(&test.join("data.csv")),
            "--out", path_str(out),
            "--optimizer", "pso",
            "--seed", "3",
        ]);
    }
    assert_eq!(fs::read(&out1).unwrap(), fs::read(&out2).unwrap());
    assert_eq!(
        fs::read(out1.with_extension("report.csv")).unwrap(),
        fs::read(out2.with_extension("report.csv")).unwrap()
    );

    // recompute known_error of each completed record from the written files
    let model = AutoencoderModel::load(&model_path).unwrap();
    let inputs = read_records(test.join("data.csv")).unwrap();
    let completed = read_records(&out1).unwrap();
    let report = fs::read_to_string(out1.with_extension("report.csv")).unwrap();
    for (line, (orig, comp)) in report
        .lines()
        .skip(1)
        .zip(inputs.records.iter().zip(&completed.records))
    {
        let fields: Vec<&str> = line.split(',').collect();
        let reported: f64 = fields[3].parse().unwrap();
        let candidate: Vec<f64> = orig
            .missing_indices()
            .iter()
            .map(|&j| model.stats.normalize_value(j, comp.values[j]).unwrap())
            .collect();
        let recomputed = known_error(&model, orig, &candidate).unwrap();
        assert!(
            (reported - recomputed).abs() <= 1e-12,
            "record {}: reported {reported}, recomputed {recomputed}",
            orig.id
        );
    }
}

#[test]
fn impute_unknown_optimizer_is_usage_error() {
    assert_exit_code(
        &[
            "impute",
            "--model", "/tmp/never.model",
            "--input", "/tmp/never.csv",
            "--out", "/tmp/never-out.csv",
            "--optimizer", "annealing",
        ],
        2,
    );
}

#[test]
fn bench_single_k0_row_and_aggregation_recheck() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    run_ok(&[
        "bench",
        "--out", path_str(&out),
        "--k", "0,1",
        "--trials", "1",
        "--n-train", "150",
        "--n-test", "12",
        "--ae-epochs", "250",
        "--clf-epochs", "120",
        "--seed", "4",
    ]);
    let sweep = fs::read_to_string(out.join("sweep_report.csv")).unwrap();
    let mut k0_rows = 0;
    for line in sweep.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields[1] == "0" {
            k0_rows += 1;
            assert!(fields[2].is_empty(), "k=0 must report est accuracy as n/a");
        }
    }
    assert_eq!(k0_rows, 2, "one k=0 row per optimizer");

    // recompute every sweep_report cell from trials.csv
    let trials = fs::read_to_string(out.join("trials.csv")).unwrap();
    for line in sweep.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let (opt, k) = (f[0], f[1]);
        let mut est_correct = 0usize;
        let mut est_total = 0usize;
        let mut class_correct = 0usize;
        let mut count = 0usize;
        let mut evals = 0usize;
        for t in trials.lines().skip(1) {
            let tf: Vec<&str> = t.split(',').collect();
            if tf[1] == opt && tf[2] == k {
                count += 1;
                est_total += tf[4].parse::<usize>().unwrap();
                est_correct += tf[5].parse::<usize>().unwrap();
                evals += tf[8].parse::<usize>().unwrap();
                if tf[10] == tf[11] {
                    class_correct += 1;
                }
            }
        }
        assert!(count > 0);
        if !f[2].is_empty() {
            let est: f64 = f[2].parse().unwrap();
            assert_eq!(est, est_correct as f64 / est_total as f64);
        }
        let class: f64 = f[3].parse().unwrap();
        assert_eq!(class, class_correct as f64 / count as f64);
        assert_eq!(f[4].parse::<usize>().unwrap(), evals);
    }
}

#[test]
fn bench_rejects_unknown_optimizer_name() {
    assert_exit_code(
        &["bench", "--out", "/tmp/never", "--optimizers", "ga,annealing"],
        2,
    );
}
