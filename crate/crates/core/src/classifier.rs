//! Condition classifier: a perceptron trained on labeled complete records,
//! scoring each record in (0, 1) with Unusable above 0.5.

use std::fs;
use std::path::Path;

use crate::autoenc::{model_from_text, model_to_text};
use crate::data::{fit_normalizer, normalize, Dataset, GasRecord, Label, NormStats};
use crate::error::{Error, Result};
use crate::mlp::{train, Activation, LayerSpec, Network, Pattern, TrainConfig};

/// Hidden width used by the reference experiments.
pub const DEFAULT_HIDDEN: usize = 31;

/// Trained classifier with its normalization statistics. The decision
/// threshold is fixed at 0.5; a score of exactly 0.5 classifies Acceptable.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub net: Network,
    pub stats: NormStats,
    pub threshold: f64,
}

impl ClassifierModel {
    pub fn width(&self) -> usize {
        self.net.input_dim()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path.as_ref(), model_to_text(&self.net, &self.stats))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<ClassifierModel> {
        let text = fs::read_to_string(path.as_ref())?;
        let (net, stats) = model_from_text(&text)?;
        if net.output_dim() != 1 {
            return Err(Error::ModelFormat(
                "classifier must have exactly one output".into(),
            ));
        }
        if net.input_dim() != stats.width() {
            return Err(Error::ModelFormat(
                "stats width does not match network width".into(),
            ));
        }
        Ok(ClassifierModel {
            net,
            stats,
            threshold: 0.5,
        })
    }
}

/// Trains the classifier on complete labeled records. Targets encode
/// Acceptable as 0 and Unusable as 1; inputs are normalized.
pub fn train_classifier(
    dataset: &Dataset,
    hidden: usize,
    config: &TrainConfig,
) -> Result<(ClassifierModel, Vec<f64>)> {
    if hidden == 0 {
        return Err(Error::InvalidConfig("hidden width must be >= 1".into()));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut saw_acceptable = false;
    let mut saw_unusable = false;
    for r in &dataset.records {
        if !r.is_complete() {
            return Err(Error::IncompleteTrainingData(format!(
                "record {:?} has missing values",
                r.id
            )));
        }
        match r.label {
            Some(Label::Acceptable) => saw_acceptable = true,
            Some(Label::Unusable) => saw_unusable = true,
            None => {
                return Err(Error::MissingLabel { id: r.id.clone() });
            }
        }
    }
    if !(saw_acceptable && saw_unusable) {
        return Err(Error::SingleClassData);
    }
    let stats = fit_normalizer(dataset)?;
    let batch: Vec<Pattern> = dataset
        .records
        .iter()
        .map(|r| {
            let n = normalize(r, &stats)?;
            let target = match r.label {
                Some(Label::Unusable) => 1.0,
                _ => 0.0,
            };
            Ok((n.values, vec![target]))
        })
        .collect::<Result<_>>()?;
    let net = Network::new(
        &[
            LayerSpec::new(dataset.width(), hidden, Activation::TanhC(1.0))?,
            LayerSpec::new(hidden, 1, Activation::Sigmoid)?,
        ],
        config.seed,
    )?;
    let (net, trace) = train(&net, &batch, config)?;
    Ok((
        ClassifierModel {
            net,
            stats,
            threshold: 0.5,
        },
        trace,
    ))
}

/// Scores one complete record. The score is the sigmoid output in (0, 1);
/// the label is Unusable iff score > threshold (strict). The score is a
/// nonlinear function of all ten inputs; no monotonicity in any single
/// variable is implied.
pub fn classify(model: &ClassifierModel, record: &GasRecord) -> Result<(Label, f64)> {
    if !record.is_complete() {
        return Err(Error::IncompleteRecord {
            id: record.id.clone(),
        });
    }
    if record.width() != model.width() {
        return Err(Error::ModelMismatch {
            model_width: model.width(),
            record_width: record.width(),
        });
    }
    let normalized = normalize(record, &model.stats)?;
    let score = model.net.forward(&normalized.values)?[0];
    let label = if score > model.threshold {
        Label::Unusable
    } else {
        Label::Acceptable
    };
    Ok((label, score))
}

/// Fraction of records whose predicted label matches the true label.
pub fn evaluate_accuracy(model: &ClassifierModel, dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut correct = 0usize;
    for r in &dataset.records {
        let truth = r.label.ok_or_else(|| Error::MissingLabel { id: r.id.clone() })?;
        let (predicted, _) = classify(model, r)?;
        if predicted == truth {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}
