//! Batch trainers: gradient descent with momentum and scaled conjugate
//! gradient (Moller's variant). Both minimize the batch average error and
//! are fully deterministic given the starting network.

use ndarray::Array1;

use super::{average_error, loss_and_gradient, Network, Pattern};
use crate::error::{Error, Result};

/// Training method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainMethod {
    /// Full-batch gradient descent with momentum.
    Gd,
    /// Scaled conjugate gradient; the default.
    Scg,
}

/// Trainer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Step size for GD; ignored by SCG.
    pub learning_rate: f64,
    /// Momentum for GD, in [0, 1); ignored by SCG.
    pub momentum: f64,
    pub method: TrainMethod,
    /// Seed consumed by model constructors for weight initialization.
    pub seed: u64,
    /// Early-stop threshold on the batch average error.
    pub target_error: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 1000,
            learning_rate: 0.01,
            momentum: 0.9,
            method: TrainMethod::Scg,
            seed: 0,
            target_error: 1e-4,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig(format!(
                "momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        if !(self.target_error > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "target error must be positive, got {}",
                self.target_error
            )));
        }
        Ok(())
    }
}

/// Trains a copy of `net` on the batch, returning the new network and the
/// per-epoch average-error trace. Stops at the epoch budget or as soon as
/// the average error reaches `target_error`.
pub fn train(net: &Network, batch: &[Pattern], config: &TrainConfig) -> Result<(Network, Vec<f64>)> {
    config.validate()?;
    if config.epochs == 0 {
        return Ok((net.clone(), Vec::new()));
    }
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    match config.method {
        TrainMethod::Gd => train_gd(net, batch, config),
        TrainMethod::Scg => train_scg(net, batch, config),
    }
}

fn train_gd(net: &Network, batch: &[Pattern], config: &TrainConfig) -> Result<(Network, Vec<f64>)> {
    let mut params = net.params();
    let mut velocity: Array1<f64> = Array1::zeros(params.len());
    let mut trace = Vec::with_capacity(config.epochs);
    let mut current = net.clone();
    for epoch in 0..config.epochs {
        let (_, grad) = loss_and_gradient(&current, batch)?;
        velocity = config.momentum * &velocity - config.learning_rate * &grad;
        params = params + &velocity;
        current = current.with_params(&params)?;
        let loss = average_error(&current, batch)?;
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        trace.push(loss);
        if loss <= config.target_error {
            break;
        }
    }
    Ok((current, trace))
}

/// Moller's scaled conjugate gradient. One iteration of the outer loop
/// counts as one epoch; unsuccessful steps (where only the scaling
/// parameter changes) still consume an epoch.
fn train_scg(net: &Network, batch: &[Pattern], config: &TrainConfig) -> Result<(Network, Vec<f64>)> {
    const SIGMA0: f64 = 1e-4;
    let restart_period = net.num_params();

    let mut w = net.params();
    let mut current = net.clone();
    let (mut loss, grad) = loss_and_gradient(&current, batch)?;
    let mut r: Array1<f64> = -grad; // negative gradient
    let mut p = r.clone();
    let mut lambda = 1e-6;
    let mut lambda_bar = 0.0;
    let mut success = true;
    let mut delta_raw = 0.0; // p' H p estimate, kept across unsuccessful steps
    let mut trace = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let p_norm_sq: f64 = p.iter().map(|v| v * v).sum();
        if p_norm_sq < 1e-300 {
            trace.push(loss); // gradient vanished: converged
            break;
        }
        if success {
            // curvature along p via a forward difference of the gradient
            let sigma = SIGMA0 / p_norm_sq.sqrt();
            let w_probe = &w + &(sigma * &p);
            let (_, grad_probe) = loss_and_gradient(&current.with_params(&w_probe)?, batch)?;
            let s = (&grad_probe + &r) / sigma; // grad(w) == -r
            delta_raw = p.dot(&s);
        }
        let mut delta = delta_raw + (lambda - lambda_bar) * p_norm_sq;
        if delta <= 0.0 {
            // make the Hessian approximation positive definite
            lambda_bar = 2.0 * (lambda - delta / p_norm_sq);
            delta = -delta + lambda * p_norm_sq;
            lambda = lambda_bar;
        }
        let mu = p.dot(&r);
        if mu <= 0.0 {
            // p stopped being a descent direction; fall back to steepest descent
            p = r.clone();
            success = true;
            trace.push(loss);
            continue;
        }
        let alpha = mu / delta;
        let w_new = &w + &(alpha * &p);
        let net_new = current.with_params(&w_new)?;
        let loss_new = average_error(&net_new, batch)?;
        if !loss_new.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        let comparison = 2.0 * delta * (loss - loss_new) / (mu * mu);

        if comparison >= 0.0 {
            // successful step
            w = w_new;
            current = net_new;
            loss = loss_new;
            let (_, grad_new) = loss_and_gradient(&current, batch)?;
            let r_new: Array1<f64> = -grad_new;
            lambda_bar = 0.0;
            success = true;
            // restart the direction periodically, otherwise conjugate update
            if (epoch + 1) % restart_period == 0 {
                p = r_new.clone();
            } else {
                let r_new_sq: f64 = r_new.iter().map(|v| v * v).sum();
                let beta = (r_new_sq - r_new.dot(&r)) / mu;
                p = &r_new + &(beta * &p);
            }
            r = r_new;
            if comparison >= 0.75 {
                lambda *= 0.25;
            }
        } else {
            lambda_bar = lambda;
            success = false;
        }
        if comparison < 0.25 {
            lambda += delta * (1.0 - comparison) / p_norm_sq;
        }
        if !lambda.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }

        trace.push(loss);
        if loss <= config.target_error {
            break;
        }
        if r.iter().map(|v| v * v).sum::<f64>() == 0.0 {
            break;
        }
    }
    Ok((current, trace))
}
