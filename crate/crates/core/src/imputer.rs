//! Missing-data recovery: candidate values for the masked slots are
//! optimized against the autoencoder reconstruction error with GA or PSO,
//! restarting while the known-components error stays above tolerance.
//! Naive mean/zero baselines and an exhaustive grid oracle live here too.

use rayon::prelude::*;

use crate::autoenc::{assemble_normalized_input, known_error, AutoencoderModel};
use crate::data::GasRecord;
use crate::error::{Error, Result};
use crate::evo::{ga_minimize, pso_minimize, Bounds, GAConfig, PSOConfig};
use crate::seed::derive_seed;

/// What the optimizer minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveMode {
    /// Squared reconstruction norm over all components, known and candidate.
    FullReconstruction,
    /// Mean squared reconstruction error over the known components only.
    KnownOnly,
}

/// Search strategy for the missing values.
#[derive(Debug, Clone, PartialEq)]
pub enum OptimizerChoice {
    Ga(GAConfig),
    Pso(PSOConfig),
    /// Fill with each variable's training mean; no search.
    MeanBaseline,
    /// Fill with zero; no search.
    ZeroBaseline,
}

/// Imputation settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputeConfig {
    pub optimizer: OptimizerChoice,
    pub mode: ObjectiveMode,
    /// Known-components error threshold that ends the recalculation loop.
    pub tolerance: f64,
    /// Maximum optimizer runs per record (first run included).
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for ImputeConfig {
    fn default() -> Self {
        ImputeConfig {
            optimizer: OptimizerChoice::Ga(GAConfig::default()),
            mode: ObjectiveMode::FullReconstruction,
            tolerance: 1e-3,
            max_restarts: 3,
            seed: 0,
        }
    }
}

impl ImputeConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_restarts == 0 {
            return Err(Error::InvalidConfig(
                "max_restarts must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Completed record plus diagnostics of the search that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputeResult {
    /// Completed record in raw units with an empty mask; imputed values are
    /// clamped at zero.
    pub record: GasRecord,
    /// Objective value (per `mode`) of the winning candidate.
    pub objective: f64,
    /// Known-components error of the winning candidate.
    pub known_error: f64,
    /// Exact number of optimizer objective evaluations across all runs.
    pub evaluations: usize,
    /// Whether the known-components error reached the tolerance.
    pub converged: bool,
    /// Optimizer runs performed (1 = no restart was needed).
    pub restarts: usize,
}

/// Reconstruction objective for a candidate at the masked slots
/// (normalized units).
///
/// `FullReconstruction` is the squared norm of (assembled input - forward
/// output) over all components; `KnownOnly` is the mean squared error over
/// the known components. Values stored under the record's mask are never
/// read.
pub fn em_objective(
    model: &AutoencoderModel,
    record: &GasRecord,
    candidate_missing: &[f64],
    mode: ObjectiveMode,
) -> Result<f64> {
    match mode {
        ObjectiveMode::KnownOnly => known_error(model, record, candidate_missing),
        ObjectiveMode::FullReconstruction => {
            let input = assemble_normalized_input(model, record, candidate_missing)?;
            let output = model.net.forward(&input)?;
            Ok(input
                .iter()
                .zip(&output)
                .map(|(x, y)| (x - y) * (x - y))
                .sum())
        }
    }
}

/// Fill kind for [`impute_baseline`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Mean,
    Zero,
}

/// Fills masked slots with the variable's training mean or with zero
/// (raw units) and clears the mask.
pub fn impute_baseline(
    record: &GasRecord,
    stats: &crate::data::NormStats,
    kind: BaselineKind,
) -> Result<GasRecord> {
    if record.width() != stats.width() {
        return Err(Error::ModelMismatch {
            model_width: stats.width(),
            record_width: record.width(),
        });
    }
    let mut out = record.clone();
    for j in 0..record.width() {
        if out.mask[j] {
            out.values[j] = match kind {
                BaselineKind::Mean => stats.vars[j].mean,
                BaselineKind::Zero => 0.0,
            };
            out.mask[j] = false;
        }
    }
    Ok(out)
}

/// Search bounds for one masked variable, in normalized units:
/// raw [0, 1.1 * observed max] mapped through the model's stats. The raw
/// lower bound of zero enforces positivity by construction.
fn normalized_bounds_for(model: &AutoencoderModel, var: usize) -> Result<(f64, f64)> {
    let lo = model.stats.normalize_value(var, 0.0)?;
    let hi = model
        .stats
        .normalize_value(var, 1.1 * model.stats.vars[var].max)?;
    Ok((lo, hi))
}

/// Recovers the masked values of one record.
///
/// A record with no masked slots is returned unchanged with zero optimizer
/// evaluations. Otherwise the configured optimizer minimizes
/// [`em_objective`] over the normalized box [0, 1.1*max] per masked
/// variable; if the resulting known-components error exceeds the tolerance,
/// the search restarts with a fresh derived seed, up to `max_restarts` runs.
/// The first converged run wins; failing convergence, the run with the
/// lowest objective does. GA populations and PSO swarms are seeded with the
/// mean-fill candidate, so the result can never score worse than mean-fill
/// under the same objective.
///
/// Records where every variable is masked are only imputable in
/// `FullReconstruction` mode (the known-components error is undefined);
/// such results report `known_error` = infinity and never converge.
pub fn impute(
    model: &AutoencoderModel,
    record: &GasRecord,
    config: &ImputeConfig,
) -> Result<ImputeResult> {
    config.validate()?;
    if record.width() != model.width() {
        return Err(Error::ModelMismatch {
            model_width: model.width(),
            record_width: record.width(),
        });
    }
    let missing = record.missing_indices();
    if missing.is_empty() {
        let objective = em_objective(model, record, &[], config.mode)?;
        let ke = known_error(model, record, &[])?;
        return Ok(ImputeResult {
            record: record.clone(),
            objective,
            known_error: ke,
            evaluations: 0,
            converged: true,
            restarts: 0,
        });
    }
    let all_missing = missing.len() == record.width();
    if all_missing && config.mode == ObjectiveMode::KnownOnly {
        return Err(Error::AllMissing);
    }

    // baselines produce a single candidate, no search, no restarts
    if let OptimizerChoice::MeanBaseline | OptimizerChoice::ZeroBaseline =
        config.optimizer
    {
        let kind = match config.optimizer {
            OptimizerChoice::MeanBaseline => BaselineKind::Mean,
            _ => BaselineKind::Zero,
        };
        let candidate: Vec<f64> = missing
            .iter()
            .map(|&j| {
                let raw = match kind {
                    BaselineKind::Mean => model.stats.vars[j].mean,
                    BaselineKind::Zero => 0.0,
                };
                model.stats.normalize_value(j, raw)
            })
            .collect::<Result<_>>()?;
        return finish(model, record, &missing, &candidate, config, 0, 1);
    }

    let intervals: Vec<(f64, f64)> = missing
        .iter()
        .map(|&j| normalized_bounds_for(model, j))
        .collect::<Result<_>>()?;
    let bounds = Bounds::new(&intervals)?;
    let mean_fill: Vec<f64> = missing
        .iter()
        .map(|&j| model.stats.normalize_value(j, model.stats.vars[j].mean))
        .collect::<Result<_>>()?;

    // surface dimension/stats errors before the search so the closure below
    // cannot fail mid-run
    em_objective(model, record, &mean_fill, config.mode)?;
    let objective = |candidate: &[f64]| -> f64 {
        em_objective(model, record, candidate, config.mode)
            .expect("validated before the search")
    };

    let mut evaluations = 0usize;
    let mut best: Option<(Vec<f64>, f64, f64)> = None; // (candidate, objective, known_error)
    let mut converged = false;
    let mut runs = 0usize;

    for restart in 0..config.max_restarts {
        let run_seed = derive_seed(config.seed, restart as u64);
        let result = match &config.optimizer {
            OptimizerChoice::Ga(ga) => {
                let cfg = GAConfig {
                    seed: run_seed,
                    ..*ga
                };
                ga_minimize(objective, &bounds, &cfg, std::slice::from_ref(&mean_fill))?
            }
            OptimizerChoice::Pso(pso) => {
                let cfg = PSOConfig {
                    seed: run_seed,
                    ..*pso
                };
                pso_minimize(objective, &bounds, &cfg, std::slice::from_ref(&mean_fill))?
            }
            _ => unreachable!("baselines handled above"),
        };
        evaluations += result.evaluations;
        runs += 1;
        let ke = if all_missing {
            f64::INFINITY
        } else {
            known_error(model, record, &result.point)?
        };
        let replace = match &best {
            None => true,
            Some((_, obj, _)) => result.value < *obj,
        };
        if replace {
            best = Some((result.point.clone(), result.value, ke));
        }
        if ke <= config.tolerance {
            // converged run wins outright
            best = Some((result.point, result.value, ke));
            converged = true;
            break;
        }
    }

    let (candidate, _, _) = best.expect("at least one restart ran");
    let mut out = finish(model, record, &missing, &candidate, config, evaluations, runs)?;
    out.converged = converged;
    Ok(out)
}

/// Denormalizes the winning candidate, clamps at zero, and assembles the
/// final result.
fn finish(
    model: &AutoencoderModel,
    record: &GasRecord,
    missing: &[usize],
    candidate: &[f64],
    config: &ImputeConfig,
    evaluations: usize,
    runs: usize,
) -> Result<ImputeResult> {
    let objective = em_objective(model, record, candidate, config.mode)?;
    let ke = if missing.len() == record.width() {
        f64::INFINITY
    } else {
        known_error(model, record, candidate)?
    };
    let mut out = record.clone();
    for (c, &j) in missing.iter().enumerate() {
        let raw = model.stats.denormalize_value(j, candidate[c])?;
        out.values[j] = raw.max(0.0);
        out.mask[j] = false;
    }
    Ok(ImputeResult {
        record: out,
        objective,
        known_error: ke,
        evaluations,
        converged: ke <= config.tolerance,
        restarts: runs,
    })
}

/// Exhaustive reference search: evaluates [`em_objective`] on the normalized
/// grid {0, step, 2*step, ...} per masked slot (one or two slots) and
/// returns the exact grid argmin, ties broken lexicographically.
pub fn grid_oracle(
    model: &AutoencoderModel,
    record: &GasRecord,
    step: f64,
    mode: ObjectiveMode,
) -> Result<(Vec<f64>, f64)> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::InvalidStep(step));
    }
    let missing = record.missing_count();
    if missing == 0 || missing > 2 {
        return Err(Error::TooManyMissing {
            count: missing,
            max: 2,
        });
    }
    let axis: Vec<f64> = {
        let mut pts = Vec::new();
        let mut i = 0usize;
        loop {
            let v = i as f64 * step;
            if v > 1.0 + 1e-12 {
                break;
            }
            pts.push(v.min(1.0));
            i += 1;
        }
        pts
    };
    let mut best_point: Option<Vec<f64>> = None;
    let mut best_value = f64::INFINITY;
    if missing == 1 {
        for &a in &axis {
            let v = em_objective(model, record, &[a], mode)?;
            if best_point.is_none() || v < best_value {
                best_value = v;
                best_point = Some(vec![a]);
            }
        }
    } else {
        for &a in &axis {
            for &b in &axis {
                let v = em_objective(model, record, &[a, b], mode)?;
                if best_point.is_none() || v < best_value {
                    best_value = v;
                    best_point = Some(vec![a, b]);
                }
            }
        }
    }
    Ok((best_point.expect("grid is never empty"), best_value))
}

/// Imputes every record of a batch with per-record derived seeds
/// (`derive_seed(config.seed, index)`), optionally in parallel. Results are
/// identical for any `jobs` value.
pub fn impute_batch(
    model: &AutoencoderModel,
    records: &[GasRecord],
    config: &ImputeConfig,
    jobs: usize,
) -> Result<Vec<ImputeResult>> {
    let run = |(ix, rec): (usize, &GasRecord)| -> Result<ImputeResult> {
        let cfg = ImputeConfig {
            seed: derive_seed(config.seed, ix as u64),
            ..config.clone()
        };
        impute(model, rec, &cfg)
    };
    if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| records.par_iter().enumerate().map(run).collect())
    } else {
        records.iter().enumerate().map(run).collect()
    }
}
