//! The four subcommands. Each resolves its flags (see [`crate::config`]),
//! does the work, and writes a manifest next to its outputs.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use dga_impute::autoenc::{train_autoencoder, AutoencoderModel};
use dga_impute::bench::{run_sweep, write_report_files, OptimizerKind, SweepConfig};
use dga_impute::classifier::{classify, train_classifier, ClassifierModel};
use dga_impute::data::{read_records, write_records, Dataset};
use dga_impute::evo::{GAConfig, PSOConfig};
use dga_impute::imputer::{impute_batch, ImputeConfig, ObjectiveMode, OptimizerChoice};
use dga_impute::mlp::{TrainConfig, TrainMethod};
use dga_impute::seed::derive_seed;
use dga_impute::synth::{default_scales, generate, mask_missing, GenConfig, Mechanism, RuleTable};

use crate::config::{CliError, Resolver};
use crate::{BenchArgs, GenArgs, ImputeArgs, TrainArgs};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_mode(s: &str) -> Result<ObjectiveMode, CliError> {
    match s {
        "full" => Ok(ObjectiveMode::FullReconstruction),
        "known" => Ok(ObjectiveMode::KnownOnly),
        other => Err(usage(format!("unknown mode {other:?} (expected full or known)"))),
    }
}

fn parse_method(s: &str) -> Result<TrainMethod, CliError> {
    match s {
        "scg" => Ok(TrainMethod::Scg),
        "gd" => Ok(TrainMethod::Gd),
        other => Err(usage(format!("unknown method {other:?} (expected scg or gd)"))),
    }
}

fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| usage(format!("bad {what} entry {t:?}: {e}")))
        })
        .collect()
}

fn join<T: std::fmt::Display>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn gen(args: GenArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut r = Resolver::new(args.config.as_deref())?;
    let out = r.required_path("out", args.out)?;
    let n = r.value("n", args.n, 500usize)?;
    let seed = r.value("seed", args.seed, 0u64)?;
    let latent_rank = r.value("latent-rank", args.latent_rank, 3usize)?;
    let loading_seed = r.value("loading-seed", args.loading_seed, 1u64)?;
    let noise = r.value("noise", args.noise, 0.1f64)?;
    let scales_str = r.value("scales", args.scales, join(&default_scales()))?;
    let rule_path = r.optional_path("rule", args.rule)?;
    let missing_k = r.value("missing-k", args.missing_k, 0usize)?;
    let mechanism_str = r.value("mechanism", args.mechanism, "mcar".to_string())?;
    let mask_seed = r.value("mask-seed", args.mask_seed, derive_seed(seed, 0x6d61_736b))?;
    r.finish()?;

    let scales: Vec<f64> = scales_str
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| usage(format!("bad scale {t:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    let mechanism = match mechanism_str.as_str() {
        "mcar" => Mechanism::Mcar,
        "mar" => Mechanism::Mar,
        other => {
            return Err(usage(format!(
                "unknown mechanism {other:?} (expected mcar or mar)"
            )))
        }
    };
    let schema = Dataset::default_schema();
    let rule = match &rule_path {
        Some(path) => RuleTable::read(path, &schema)?,
        None => RuleTable::default_for(&schema, &scales),
    };

    let config = GenConfig {
        n_records: n,
        latent_rank,
        loading_seed,
        scales,
        noise_fraction: noise,
        label_rule: rule.clone(),
        master_seed: seed,
    };
    let dataset = generate(&config)?;

    fs::create_dir_all(&out)?;
    rule.write(out.join("rules.txt"), &schema)?;
    if missing_k > 0 {
        write_records(&dataset, out.join("truth.csv"))?;
        let masked = mask_missing(&dataset, missing_k, mechanism, mask_seed)?;
        write_records(&masked, out.join("data.csv"))?;
    } else {
        write_records(&dataset, out.join("data.csv"))?;
    }
    r.write_manifest("gen", &out.join("manifest.txt"), started.elapsed().as_secs_f64())?;
    println!(
        "wrote {} records to {}",
        dataset.len(),
        out.join("data.csv").display()
    );
    Ok(())
}

#[derive(Clone, Copy)]
pub enum TrainKind {
    Ae,
    Clf,
}

pub fn train(args: TrainArgs, kind: TrainKind) -> Result<(), CliError> {
    let started = Instant::now();
    let (command, default_hidden, default_epochs) = match kind {
        TrainKind::Ae => ("train-ae", dga_impute::autoenc::DEFAULT_HIDDEN, 1500),
        TrainKind::Clf => ("train-clf", dga_impute::classifier::DEFAULT_HIDDEN, 500),
    };
    let mut r = Resolver::new(args.config.as_deref())?;
    let data = r.required_path("data", args.data)?;
    let out = r.required_path("out", args.out)?;
    let hidden = r.value("hidden", args.hidden, default_hidden)?;
    let epochs = r.value("epochs", args.epochs, default_epochs)?;
    let method = parse_method(&r.value("method", args.method, "scg".to_string())?)?;
    let lr = r.value("lr", args.lr, 0.01f64)?;
    let momentum = r.value("momentum", args.momentum, 0.9f64)?;
    let target_error = r.value("target-error", args.target_error, 1e-4f64)?;
    let seed = r.value("seed", args.seed, 0u64)?;
    r.finish()?;

    let dataset = read_records(&data)?;
    let cfg = TrainConfig {
        epochs,
        learning_rate: lr,
        momentum,
        method,
        seed,
        target_error,
    };
    let trace = match kind {
        TrainKind::Ae => {
            let (model, trace) = train_autoencoder(&dataset, hidden, &cfg)?;
            model.save(&out)?;
            trace
        }
        TrainKind::Clf => {
            let (model, trace) = train_classifier(&dataset, hidden, &cfg)?;
            model.save(&out)?;
            trace
        }
    };

    let mut loss_csv = String::from("epoch,eps_av\n");
    for (i, v) in trace.iter().enumerate() {
        loss_csv.push_str(&format!("{},{}\n", i + 1, v));
    }
    fs::write(loss_path(&out), loss_csv)?;
    r.write_manifest(command, &manifest_path(&out), started.elapsed().as_secs_f64())?;
    println!(
        "trained {} epochs, final eps_av {}",
        trace.len(),
        trace.last().map(|v| v.to_string()).unwrap_or_else(|| "n/a".into())
    );
    Ok(())
}

fn loss_path(out: &std::path::Path) -> PathBuf {
    out.with_extension("loss.csv")
}

fn manifest_path(out: &std::path::Path) -> PathBuf {
    out.with_extension("manifest.txt")
}

pub fn impute(args: ImputeArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut r = Resolver::new(args.config.as_deref())?;
    let model_path = r.required_path("model", args.model)?;
    let input = r.required_path("input", args.input)?;
    let out = r.required_path("out", args.out)?;
    let optimizer_str = r.value("optimizer", args.optimizer, "ga".to_string())?;
    let mode = parse_mode(&r.value("mode", args.mode, "full".to_string())?)?;
    let tolerance = r.value("tolerance", args.tolerance, 1e-3f64)?;
    let restarts = r.value("restarts", args.restarts, 3usize)?;
    let seed = r.value("seed", args.seed, 0u64)?;
    let jobs = r.value("jobs", args.jobs, 1usize)?;
    let ga_pop = r.value("ga-pop", args.ga_pop, GAConfig::default().population)?;
    let ga_gens = r.value("ga-gens", args.ga_gens, GAConfig::default().generations)?;
    let pso_swarm = r.value("pso-swarm", args.pso_swarm, PSOConfig::default().swarm)?;
    let pso_iters = r.value("pso-iters", args.pso_iters, PSOConfig::default().iterations)?;
    let report_path = r.value(
        "report",
        args.report.map(|p| p.display().to_string()),
        out.with_extension("report.csv").display().to_string(),
    )?;
    let do_classify = r.value("classify", args.classify.then_some(true), false)?;
    let clf_path = r.optional_path("clf", args.clf)?;
    r.finish()?;

    let ga = GAConfig {
        population: ga_pop,
        generations: ga_gens,
        ..Default::default()
    };
    let pso = PSOConfig {
        swarm: pso_swarm,
        iterations: pso_iters,
        ..Default::default()
    };
    let optimizer = match optimizer_str.as_str() {
        "ga" => OptimizerChoice::Ga(ga),
        "pso" => OptimizerChoice::Pso(pso),
        "mean" => OptimizerChoice::MeanBaseline,
        "zero" => OptimizerChoice::ZeroBaseline,
        other => {
            return Err(usage(format!(
                "unknown optimizer {other:?} (expected ga, pso, mean, or zero)"
            )))
        }
    };
    let clf_model = if do_classify {
        let path = clf_path.ok_or_else(|| usage("--classify requires --clf <model>"))?;
        Some(ClassifierModel::load(path)?)
    } else {
        None
    };

    let model = AutoencoderModel::load(&model_path)?;
    let dataset = read_records(&input)?;
    let cfg = ImputeConfig {
        optimizer,
        mode,
        tolerance,
        max_restarts: restarts,
        seed,
    };
    let results = impute_batch(&model, &dataset.records, &cfg, jobs)?;

    let completed = Dataset::new(
        dataset.schema.clone(),
        results.iter().map(|res| res.record.clone()).collect(),
    )?;
    write_records(&completed, &out)?;

    let mut report = String::from("record,missing,objective,known_error,evaluations,converged,restarts");
    if clf_model.is_some() {
        report.push_str(",predicted,score");
    }
    report.push('\n');
    for (orig, res) in dataset.records.iter().zip(&results) {
        report.push_str(&format!(
            "{},{},{},{},{},{},{}",
            orig.id,
            orig.missing_count(),
            res.objective,
            res.known_error,
            res.evaluations,
            res.converged,
            res.restarts
        ));
        if let Some(clf) = &clf_model {
            let (label, score) = classify(clf, &res.record)?;
            report.push_str(&format!(",{},{}", label.as_str(), score));
        }
        report.push('\n');
    }
    fs::write(PathBuf::from(&report_path), report)?;
    r.write_manifest("impute", &manifest_path(&out), started.elapsed().as_secs_f64())?;
    println!(
        "imputed {} records -> {} (report {})",
        results.len(),
        out.display(),
        report_path
    );
    Ok(())
}

pub fn bench(args: BenchArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let mut r = Resolver::new(args.config.as_deref())?;
    let out = r.required_path("out", args.out)?;
    let k_str = r.value("k", args.k, "0,1,2,3,4".to_string())?;
    let trials = r.value("trials", args.trials, 3usize)?;
    let optimizers_str = r.value("optimizers", args.optimizers, "ga,pso".to_string())?;
    let seed = r.value("seed", args.seed, 0u64)?;
    let jobs = r.value("jobs", args.jobs, 1usize)?;
    let n_train = r.value("n-train", args.n_train, 500usize)?;
    let n_test = r.value("n-test", args.n_test, 200usize)?;
    let train_data = r.optional_path("train-data", args.train_data)?;
    let test_data = r.optional_path("test-data", args.test_data)?;
    let noise = r.value("noise", args.noise, 0.1f64)?;
    let latent_rank = r.value("latent-rank", args.latent_rank, 3usize)?;
    let ae_hidden = r.value("ae-hidden", args.ae_hidden, dga_impute::autoenc::DEFAULT_HIDDEN)?;
    let ae_epochs = r.value("ae-epochs", args.ae_epochs, 1500usize)?;
    let clf_hidden = r.value(
        "clf-hidden",
        args.clf_hidden,
        dga_impute::classifier::DEFAULT_HIDDEN,
    )?;
    let clf_epochs = r.value("clf-epochs", args.clf_epochs, 500usize)?;
    let mode = parse_mode(&r.value("mode", args.mode, "full".to_string())?)?;
    let tolerance = r.value("tolerance", args.tolerance, 1e-3f64)?;
    let restarts = r.value("restarts", args.restarts, 3usize)?;
    let ga_pop = r.value("ga-pop", args.ga_pop, GAConfig::default().population)?;
    let ga_gens = r.value("ga-gens", args.ga_gens, GAConfig::default().generations)?;
    let pso_swarm = r.value("pso-swarm", args.pso_swarm, PSOConfig::default().swarm)?;
    let pso_iters = r.value("pso-iters", args.pso_iters, PSOConfig::default().iterations)?;
    r.finish()?;

    let ks = parse_usize_list(&k_str, "k")?;
    let optimizers: Vec<OptimizerKind> = optimizers_str
        .split(',')
        .map(|t| {
            OptimizerKind::parse(t.trim())
                .ok_or_else(|| usage(format!("unknown optimizer {t:?} (expected ga, pso, mean, or zero)")))
        })
        .collect::<Result<_, _>>()?;

    let config = SweepConfig {
        gen: GenConfig {
            n_records: n_train,
            latent_rank,
            noise_fraction: noise,
            ..Default::default()
        },
        n_test,
        train_data_path: train_data,
        test_data_path: test_data,
        ks,
        optimizers,
        trials,
        master_seed: seed,
        jobs,
        ae_hidden,
        clf_hidden,
        ae_train: TrainConfig {
            epochs: ae_epochs,
            ..Default::default()
        },
        clf_train: TrainConfig {
            epochs: clf_epochs,
            ..Default::default()
        },
        ga: GAConfig {
            population: ga_pop,
            generations: ga_gens,
            ..Default::default()
        },
        pso: PSOConfig {
            swarm: pso_swarm,
            iterations: pso_iters,
            ..Default::default()
        },
        mode,
        tolerance,
        max_restarts: restarts,
        ae_model_path: None,
        clf_model_path: None,
    };

    let report = run_sweep(&config)?;
    write_report_files(&report, &out)?;
    r.write_manifest("bench", &out.join("manifest.txt"), started.elapsed().as_secs_f64())?;
    print!("{}", dga_impute::bench::render_table(&report));
    println!("outputs written to {}", out.display());
    Ok(())
}
