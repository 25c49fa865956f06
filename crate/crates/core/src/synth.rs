//! Synthetic generation of correlated, positive, heterogeneously-scaled gas
//! datasets with rule-based condition labels and controlled missingness.
//!
//! Records are drawn from a log-normal latent-factor model:
//! `values = scale * exp(L*z + eps)` with `z` standard normal of rank
//! `latent_rank`, `L` a fixed seeded loading matrix with positive entries,
//! and `eps` Gaussian noise whose std is `noise_fraction` times each
//! variable's latent log-std. Exponentiation keeps every value strictly
//! positive; shared factors make variables positively correlated.
//!
//! Generation is pure given the config: record `i` uses the child seed
//! `derive_seed(master_seed, i)`, so any execution schedule produces the
//! same dataset.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::data::{Dataset, GasRecord, Label, NUM_VARS};
use crate::error::{Error, Result};
use crate::seed::derive_seed;

/// Default per-variable scale vector: geometric spacing from 1 to 5000 ppm,
/// giving per-variable standard deviations spanning roughly three orders of
/// magnitude.
pub fn default_scales() -> Vec<f64> {
    let ratio = 5000f64.powf(1.0 / (NUM_VARS as f64 - 1.0));
    (0..NUM_VARS).map(|j| ratio.powi(j as i32)).collect()
}

/// Threshold rule: a record is Unusable iff any thresholded variable
/// strictly exceeds its limit.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleTable {
    /// One optional threshold (ppm) per variable.
    pub thresholds: Vec<Option<f64>>,
}

impl RuleTable {
    /// Validates invariants: at least one threshold, all positive.
    pub fn new(thresholds: Vec<Option<f64>>) -> Result<Self> {
        if thresholds.iter().all(|t| t.is_none()) {
            return Err(Error::InvalidConfig(
                "rule table must define at least one threshold".into(),
            ));
        }
        for (j, t) in thresholds.iter().enumerate() {
            if let Some(v) = t {
                if !(*v > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "threshold for variable {j} must be positive, got {v}"
                    )));
                }
            }
        }
        Ok(RuleTable { thresholds })
    }

    /// Default rule calibrated against the default generator: limits on H2,
    /// C2H2, and TDCG at roughly the 80th percentile of each variable.
    pub fn default_for(schema: &[String], scales: &[f64]) -> Self {
        let mut thresholds = vec![None; schema.len()];
        for (j, name) in schema.iter().enumerate() {
            let factor = match name.as_str() {
                "H2" => Some(1.7),
                "C2H2" => Some(1.7),
                "TDCG" => Some(1.7),
                _ => None,
            };
            thresholds[j] = factor.map(|f| f * scales[j]);
        }
        if thresholds.iter().all(|t| t.is_none()) {
            // schema without the conventional names: threshold the last variable
            let last = schema.len() - 1;
            thresholds[last] = Some(1.7 * scales[last]);
        }
        RuleTable { thresholds }
    }

    /// Reads a rule table: one `NAME=THRESHOLD` line per variable, `#`
    /// starts a comment, blank lines ignored.
    pub fn read(path: impl AsRef<Path>, schema: &[String]) -> Result<Self> {
        let file = File::open(path.as_ref())?;
        let reader = BufReader::new(file);
        let mut thresholds = vec![None; schema.len()];
        for (ix, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.split('#').next().unwrap_or("").trim();
            if trimmed.is_empty() {
                continue;
            }
            let (name, value) = trimmed.split_once('=').ok_or_else(|| Error::Parse {
                row: ix + 1,
                col: 1,
                msg: format!("expected NAME=THRESHOLD, got {trimmed:?}"),
            })?;
            let name = name.trim();
            let j = schema
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| Error::Parse {
                    row: ix + 1,
                    col: 1,
                    msg: format!("unknown variable {name:?}"),
                })?;
            let v: f64 = value.trim().parse().map_err(|e| Error::Parse {
                row: ix + 1,
                col: 2,
                msg: format!("{e}: {value:?}"),
            })?;
            thresholds[j] = Some(v);
        }
        RuleTable::new(thresholds)
    }

    /// Writes the table in the same format [`RuleTable::read`] accepts.
    pub fn write(&self, path: impl AsRef<Path>, schema: &[String]) -> Result<()> {
        let file = File::create(path.as_ref())?;
        let mut w = BufWriter::new(file);
        writeln!(w, "# threshold rule: any variable above its limit => unusable")?;
        for (j, t) in self.thresholds.iter().enumerate() {
            if let Some(v) = t {
                writeln!(w, "{}={}", schema[j], v)?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Missingness mechanism for [`mask_missing`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mechanism {
    /// Missing completely at random: k positions per record, uniform
    /// without replacement.
    Mcar,
    /// Missing at random: masking depends only on the always-observed
    /// variable 0. Each record masks variables 1..width independently with
    /// probability proportional to the rank of its variable-0 value, tuned
    /// so the expected number of masked cells per record is k.
    Mar,
}

/// Generator settings.
#[derive(Debug, Clone, PartialEq)]
pub struct GenConfig {
    pub n_records: usize,
    /// Number of shared latent factors, in [1, 10].
    pub latent_rank: usize,
    /// Seed for the fixed loading matrix.
    pub loading_seed: u64,
    /// Per-variable positive scale vector (ppm).
    pub scales: Vec<f64>,
    /// Log-space noise std as a fraction of each variable's latent log-std,
    /// in [0, 1).
    pub noise_fraction: f64,
    pub label_rule: RuleTable,
    pub master_seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        let scales = default_scales();
        let schema = Dataset::default_schema();
        GenConfig {
            n_records: 500,
            latent_rank: 3,
            loading_seed: 1,
            label_rule: RuleTable::default_for(&schema, &scales),
            scales,
            noise_fraction: 0.1,
            master_seed: 0,
        }
    }
}

impl GenConfig {
    fn validate(&self) -> Result<()> {
        let width = self.scales.len();
        if width != NUM_VARS {
            return Err(Error::InvalidConfig(format!(
                "scale vector must have {NUM_VARS} entries, got {width}"
            )));
        }
        if self.latent_rank < 1 || self.latent_rank > width {
            return Err(Error::InvalidConfig(format!(
                "latent_rank must be in [1, {width}], got {}",
                self.latent_rank
            )));
        }
        if self.scales.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidConfig("scales must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.noise_fraction) {
            return Err(Error::InvalidConfig(format!(
                "noise_fraction must be in [0, 1), got {}",
                self.noise_fraction
            )));
        }
        if self.label_rule.thresholds.len() != width {
            return Err(Error::InvalidConfig(
                "rule table width does not match scale vector".into(),
            ));
        }
        RuleTable::new(self.label_rule.thresholds.clone())?;
        Ok(())
    }
}

/// Builds the seeded loading matrix (width x rank). Entries are positive and
/// shrink with rank so each variable's latent log-std stays near 0.6.
fn loading_matrix(width: usize, rank: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (rank as f64).sqrt();
    (0..width)
        .map(|_| (0..rank).map(|_| rng.random_range(0.3..0.9) * scale).collect())
        .collect()
}

/// Generates a labeled, complete dataset per the latent-factor model.
pub fn generate(config: &GenConfig) -> Result<Dataset> {
    config.validate()?;
    let width = config.scales.len();
    let loadings = loading_matrix(width, config.latent_rank, config.loading_seed);
    let log_stds: Vec<f64> = loadings
        .iter()
        .map(|row| row.iter().map(|l| l * l).sum::<f64>().sqrt())
        .collect();

    let mut records = Vec::with_capacity(config.n_records);
    for i in 0..config.n_records {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.master_seed, i as u64));
        let z: Vec<f64> = (0..config.latent_rank)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let mut values = Vec::with_capacity(width);
        for j in 0..width {
            let mut g: f64 = loadings[j].iter().zip(&z).map(|(l, zf)| l * zf).sum();
            if config.noise_fraction > 0.0 {
                let eps: f64 = StandardNormal.sample(&mut rng);
                g += config.noise_fraction * log_stds[j] * eps;
            }
            values.push(config.scales[j] * g.exp());
        }
        let mut record = GasRecord::complete(format!("b{}", i + 1), values, None);
        record.label = Some(apply_rule(&record, &config.label_rule)?);
        records.push(record);
    }
    Dataset::new(Dataset::default_schema(), records)
}

/// Labels one complete record: Unusable iff any thresholded variable
/// strictly exceeds its threshold (boundary values are Acceptable).
pub fn apply_rule(record: &GasRecord, rule: &RuleTable) -> Result<Label> {
    for (j, t) in rule.thresholds.iter().enumerate() {
        if let Some(limit) = t {
            if record.mask[j] {
                return Err(Error::IncompleteRecord {
                    id: record.id.clone(),
                });
            }
            if record.values[j] > *limit {
                return Ok(Label::Unusable);
            }
        }
    }
    Ok(Label::Acceptable)
}

/// Masks variables in every record, keeping the stored values (ground truth
/// is retained for scoring) and the labels untouched.
///
/// MCAR masks exactly `k` positions per record. MAR never masks variable 0
/// and masks an expected `k` positions per record, with per-record masking
/// probability proportional to the rank of the record's variable-0 value.
pub fn mask_missing(
    dataset: &Dataset,
    k: usize,
    mechanism: Mechanism,
    seed: u64,
) -> Result<Dataset> {
    let width = dataset.width();
    let max_k = match mechanism {
        Mechanism::Mcar => width,
        Mechanism::Mar => width - 1,
    };
    if k > max_k {
        return Err(Error::InvalidK { k, max: max_k });
    }
    let mut out = dataset.clone();
    if k == 0 {
        return Ok(out);
    }
    match mechanism {
        Mechanism::Mcar => {
            for (i, rec) in out.records.iter_mut().enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
                // partial Fisher-Yates: first k entries are the masked positions
                let mut idx: Vec<usize> = (0..width).collect();
                for pick in 0..k {
                    let j = rng.random_range(pick..width);
                    idx.swap(pick, j);
                    rec.mask[idx[pick]] = true;
                }
            }
        }
        Mechanism::Mar => {
            let ranks = rank_of_first_variable(dataset);
            let n = dataset.len() as f64;
            let mean_rank = (n + 1.0) / 2.0;
            let per_var = (width - 1) as f64;
            for (i, rec) in out.records.iter_mut().enumerate() {
                let p = (k as f64 * ranks[i] as f64 / (per_var * mean_rank)).min(1.0);
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
                for j in 1..width {
                    if rng.random::<f64>() < p {
                        rec.mask[j] = true;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// 1-based ranks of variable 0, ties broken by record order.
fn rank_of_first_variable(dataset: &Dataset) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.sort_by(|&a, &b| {
        dataset.records[a].values[0]
            .partial_cmp(&dataset.records[b].values[0])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut ranks = vec![0usize; dataset.len()];
    for (rank0, &i) in order.iter().enumerate() {
        ranks[i] = rank0 + 1;
    }
    ranks
}
