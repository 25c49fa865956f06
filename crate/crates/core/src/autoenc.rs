//! Bottleneck autoencoder: training on complete records, the
//! known-components error used as the imputation stopping signal, and a
//! contraction diagnostic.

use std::fs;
use std::path::Path;

use crate::data::{fit_normalizer, normalize, Dataset, GasRecord, NormStats, VarStats};
use crate::error::{Error, Result};
use crate::mlp::{train, Activation, LayerSpec, Network, Pattern, TrainConfig};

/// Hidden width used by the reference experiments.
pub const DEFAULT_HIDDEN: usize = 7;

/// Minimum number of complete records required for training.
pub const MIN_TRAINING_RECORDS: usize = 50;

/// Trained autoencoder plus the normalization statistics bound at training
/// time. Input and output widths are equal; the hidden layer is narrower.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderModel {
    pub net: Network,
    pub stats: NormStats,
}

impl AutoencoderModel {
    pub fn width(&self) -> usize {
        self.net.input_dim()
    }

    /// Reconstructs a normalized input vector.
    pub fn reconstruct(&self, x_norm: &[f64]) -> Result<Vec<f64>> {
        self.net.forward(x_norm)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path.as_ref(), model_to_text(&self.net, &self.stats))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<AutoencoderModel> {
        let text = fs::read_to_string(path.as_ref())?;
        let (net, stats) = model_from_text(&text)?;
        if net.input_dim() != net.output_dim() {
            return Err(Error::ModelFormat(
                "autoencoder input and output widths differ".into(),
            ));
        }
        if net.input_dim() != stats.width() {
            return Err(Error::ModelFormat(
                "stats width does not match network width".into(),
            ));
        }
        Ok(AutoencoderModel { net, stats })
    }
}

/// Serializes a network followed by a `stats` section with one
/// `name min max mean std` line per variable.
pub(crate) fn model_to_text(net: &Network, stats: &NormStats) -> String {
    let mut out = net.to_text();
    out.push_str("stats\n");
    for (name, v) in stats.names.iter().zip(&stats.vars) {
        out.push_str(&format!(
            "{} {:.16e} {:.16e} {:.16e} {:.16e}\n",
            name, v.min, v.max, v.mean, v.std
        ));
    }
    out
}

pub(crate) fn model_from_text(text: &str) -> Result<(Network, NormStats)> {
    let mut lines = text.lines();
    let net = Network::from_lines(&mut lines)?;
    match lines.next() {
        Some("stats") => {}
        other => {
            return Err(Error::ModelFormat(format!(
                "expected stats section, got {other:?}"
            )))
        }
    }
    let mut names = Vec::new();
    let mut vars = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 5 {
            return Err(Error::ModelFormat(format!("bad stats line: {line:?}")));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|e| Error::ModelFormat(format!("bad stats number: {e}")))
        };
        names.push(tokens[0].to_string());
        vars.push(VarStats {
            min: parse(tokens[1])?,
            max: parse(tokens[2])?,
            mean: parse(tokens[3])?,
            std: parse(tokens[4])?,
        });
    }
    if vars.is_empty() {
        return Err(Error::ModelFormat("stats section is empty".into()));
    }
    Ok((net, NormStats { names, vars }))
}

/// Trains an autoencoder on a complete dataset: inputs are normalized
/// records, targets are the inputs themselves. Returns the model and the
/// per-epoch loss trace.
pub fn train_autoencoder(
    dataset: &Dataset,
    hidden: usize,
    config: &TrainConfig,
) -> Result<(AutoencoderModel, Vec<f64>)> {
    let width = dataset.width();
    if hidden == 0 || hidden >= width {
        return Err(Error::InvalidConfig(format!(
            "hidden width must be in [1, {}], got {hidden}",
            width - 1
        )));
    }
    if dataset.len() < MIN_TRAINING_RECORDS {
        return Err(Error::IncompleteTrainingData(format!(
            "need at least {MIN_TRAINING_RECORDS} records, got {}",
            dataset.len()
        )));
    }
    if let Some(r) = dataset.records.iter().find(|r| !r.is_complete()) {
        return Err(Error::IncompleteTrainingData(format!(
            "record {:?} has missing values",
            r.id
        )));
    }
    let stats = fit_normalizer(dataset)?;
    let batch: Vec<Pattern> = dataset
        .records
        .iter()
        .map(|r| {
            let n = normalize(r, &stats)?;
            Ok((n.values.clone(), n.values))
        })
        .collect::<Result<_>>()?;
    let net = Network::new(
        &[
            LayerSpec::new(width, hidden, Activation::TanhC(1.0))?,
            LayerSpec::new(hidden, width, Activation::Sigmoid)?,
        ],
        config.seed,
    )?;
    let (net, trace) = train(&net, &batch, config)?;
    Ok((AutoencoderModel { net, stats }, trace))
}

/// Mean squared input-vs-output error over the KNOWN positions of a record,
/// with `candidate_missing` (normalized units) standing in at the masked
/// positions. The values stored under the mask are never read.
pub fn known_error(
    model: &AutoencoderModel,
    record: &GasRecord,
    candidate_missing: &[f64],
) -> Result<f64> {
    let input = assemble_normalized_input(model, record, candidate_missing)?;
    let known: Vec<usize> = (0..record.width()).filter(|&j| !record.mask[j]).collect();
    if known.is_empty() {
        return Err(Error::AllMissing);
    }
    let output = model.net.forward(&input)?;
    let sum: f64 = known
        .iter()
        .map(|&j| (input[j] - output[j]) * (input[j] - output[j]))
        .sum();
    Ok(sum / known.len() as f64)
}

/// Builds the full normalized input vector: normalized known values plus the
/// candidate at masked slots. Reads only unmasked positions of `record`.
pub(crate) fn assemble_normalized_input(
    model: &AutoencoderModel,
    record: &GasRecord,
    candidate_missing: &[f64],
) -> Result<Vec<f64>> {
    if record.width() != model.width() {
        return Err(Error::ModelMismatch {
            model_width: model.width(),
            record_width: record.width(),
        });
    }
    let missing = record.missing_count();
    if candidate_missing.len() != missing {
        return Err(Error::DimensionMismatch {
            what: "candidate for missing slots",
            expected: missing,
            found: candidate_missing.len(),
        });
    }
    let mut input = vec![0.0; record.width()];
    let mut c = 0;
    for j in 0..record.width() {
        if record.mask[j] {
            input[j] = candidate_missing[c];
            c += 1;
        } else {
            input[j] = model.stats.normalize_value(j, record.values[j])?;
        }
    }
    Ok(input)
}

/// Distance-contraction diagnostic over pairs of normalized vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractivityReport {
    pub max_ratio: f64,
    pub mean_ratio: f64,
    /// Pairs actually scored (coincident pairs are skipped).
    pub pairs_used: usize,
}

/// For each pair, computes `||f(x) - f(y)|| / ||x - y||` through the
/// autoencoder. Pairs closer than 1e-12 are skipped. Diagnostic only: a
/// trained perceptron carries no global contraction guarantee.
pub fn contractivity_probe(
    model: &AutoencoderModel,
    pairs: &[(Vec<f64>, Vec<f64>)],
) -> Result<ContractivityReport> {
    let mut max_ratio = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut used = 0usize;
    for (x, y) in pairs {
        let dist_in = euclidean(x, y);
        if dist_in < 1e-12 {
            continue;
        }
        let fx = model.net.forward(x)?;
        let fy = model.net.forward(y)?;
        let ratio = euclidean(&fx, &fy) / dist_in;
        max_ratio = max_ratio.max(ratio);
        sum += ratio;
        used += 1;
    }
    if used == 0 {
        return Err(Error::NoValidPairs);
    }
    Ok(ContractivityReport {
        max_ratio,
        mean_ratio: sum / used as f64,
        pairs_used: used,
    })
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
