//! Library-level integration: generate -> train -> impute -> classify,
//! exercising the public API end to end.

use dga_impute::autoenc::{contractivity_probe, train_autoencoder, AutoencoderModel};
use dga_impute::classifier::{classify, evaluate_accuracy, train_classifier};
use dga_impute::data::{normalize, within_std_correct, Dataset};
use dga_impute::evo::{GAConfig, PSOConfig};
use dga_impute::imputer::{impute, impute_baseline, BaselineKind, ImputeConfig, OptimizerChoice};
use dga_impute::mlp::TrainConfig;
use dga_impute::seed::derive_seed;
use dga_impute::synth::{generate, mask_missing, GenConfig, Mechanism};

fn train_data(seed: u64) -> Dataset {
    generate(&GenConfig {
        n_records: 300,
        master_seed: seed,
        ..Default::default()
    })
    .unwrap()
}

#[test]
fn generate_train_impute_classify_round_trip() {
    let train = train_data(1);
    let ae_cfg = TrainConfig {
        epochs: 700,
        seed: 2,
        ..Default::default()
    };
    let (ae, trace) = train_autoencoder(&train, 7, &ae_cfg).unwrap();
    assert!(trace.last().unwrap() < &1e-2);
    let (clf, _) = train_classifier(
        &train,
        31,
        &TrainConfig {
            epochs: 300,
            seed: 3,
            ..Default::default()
        },
    )
    .unwrap();

    let test = generate(&GenConfig {
        n_records: 60,
        master_seed: 9,
        ..Default::default()
    })
    .unwrap();
    let masked = mask_missing(&test, 2, Mechanism::Mcar, 4).unwrap();

    let mut slots = 0usize;
    let mut within = 0usize;
    let mut class_correct = 0usize;
    for (ix, rec) in masked.records.iter().enumerate() {
        let cfg = ImputeConfig {
            optimizer: OptimizerChoice::Pso(PSOConfig::default()),
            seed: derive_seed(77, ix as u64),
            ..Default::default()
        };
        let result = impute(&ae, rec, &cfg).unwrap();
        assert!(result.record.is_complete());
        for j in rec.missing_indices() {
            slots += 1;
            if within_std_correct(
                result.record.values[j],
                test.records[ix].values[j],
                ae.stats.vars[j].std,
            ) {
                within += 1;
            }
        }
        let (label, _) = classify(&clf, &result.record).unwrap();
        if label == test.records[ix].label.unwrap() {
            class_correct += 1;
        }
    }
    let est_acc = within as f64 / slots as f64;
    let class_acc = class_correct as f64 / masked.records.len() as f64;
    assert!(est_acc >= 0.8, "estimation accuracy {est_acc}");
    assert!(class_acc >= 0.8, "classification accuracy {class_acc}");
}

#[test]
fn impute_from_reloaded_model_matches_in_memory_model() {
    let train = train_data(5);
    let (ae, _) = train_autoencoder(
        &train,
        7,
        &TrainConfig {
            epochs: 300,
            seed: 8,
            ..Default::default()
        },
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ae.model");
    ae.save(&path).unwrap();
    let reloaded = AutoencoderModel::load(&path).unwrap();

    let test = generate(&GenConfig {
        n_records: 10,
        master_seed: 6,
        ..Default::default()
    })
    .unwrap();
    let masked = mask_missing(&test, 3, Mechanism::Mcar, 2).unwrap();
    let cfg = ImputeConfig {
        optimizer: OptimizerChoice::Ga(GAConfig::default()),
        seed: 55,
        ..Default::default()
    };
    for rec in &masked.records {
        let a = impute(&ae, rec, &cfg).unwrap();
        let b = impute(&reloaded, rec, &cfg).unwrap();
        assert_eq!(a, b, "serialization must not change results");
    }
}

#[test]
fn contractivity_probe_on_trained_model_reports_finite_ratios() {
    let train = train_data(10);
    let (ae, _) = train_autoencoder(
        &train,
        7,
        &TrainConfig {
            epochs: 500,
            seed: 4,
            ..Default::default()
        },
    )
    .unwrap();
    let normalized: Vec<Vec<f64>> = train
        .records
        .iter()
        .take(200)
        .map(|r| normalize(r, &ae.stats).unwrap().values)
        .collect();
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = normalized
        .chunks_exact(2)
        .map(|c| (c[0].clone(), c[1].clone()))
        .collect();
    let report = contractivity_probe(&ae, &pairs).unwrap();
    assert!(report.max_ratio.is_finite());
    assert!(report.mean_ratio > 0.0);
    assert!(report.pairs_used > 90);
    // diagnostic only: no threshold asserted on the ratio itself
}

#[test]
fn zero_fill_baseline_misses_large_values() {
    let train = train_data(20);
    let stats = dga_impute::data::fit_normalizer(&train).unwrap();
    // a record whose masked value is far above one std
    let mut rec = train.records[0].clone();
    let j = 9; // largest-scale variable
    let truth = stats.vars[j].mean + 3.0 * stats.vars[j].std;
    rec.values[j] = truth;
    rec.mask[j] = true;
    let zero = impute_baseline(&rec, &stats, BaselineKind::Zero).unwrap();
    assert!(!within_std_correct(zero.values[j], truth, stats.vars[j].std));
    let mean = impute_baseline(&rec, &stats, BaselineKind::Mean).unwrap();
    assert_eq!(mean.values[j], stats.vars[j].mean);
}

#[test]
fn mean_and_zero_baselines_run_through_the_impute_api() {
    let train = train_data(30);
    let (ae, _) = train_autoencoder(
        &train,
        7,
        &TrainConfig {
            epochs: 200,
            seed: 1,
            ..Default::default()
        },
    )
    .unwrap();
    let masked = mask_missing(&train, 2, Mechanism::Mcar, 8).unwrap();
    for kind in [OptimizerChoice::MeanBaseline, OptimizerChoice::ZeroBaseline] {
        let cfg = ImputeConfig {
            optimizer: kind,
            seed: 0,
            ..Default::default()
        };
        let res = impute(&ae, &masked.records[0], &cfg).unwrap();
        assert!(res.record.is_complete());
        assert_eq!(res.evaluations, 0, "baselines must not spend optimizer evaluations");
        assert!(res.objective.is_finite());
    }
}

#[test]
fn classifier_accuracy_against_held_out_data() {
    let all = generate(&GenConfig {
        n_records: 1000,
        master_seed: 40,
        ..Default::default()
    })
    .unwrap();
    let train = Dataset::new(all.schema.clone(), all.records[..800].to_vec()).unwrap();
    let held = Dataset::new(all.schema.clone(), all.records[800..].to_vec()).unwrap();
    let (clf, _) = train_classifier(
        &train,
        31,
        &TrainConfig {
            epochs: 300,
            seed: 5,
            ..Default::default()
        },
    )
    .unwrap();
    let acc = evaluate_accuracy(&clf, &held).unwrap();
    assert!(acc > 0.9, "held-out accuracy {acc}");
}
