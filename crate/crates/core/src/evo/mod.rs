//! Bounded real-vector minimizers: a real-coded genetic algorithm with
//! roulette selection, arithmetic crossover, and non-uniform mutation, and a
//! gbest particle swarm optimizer with velocity clamping.
//!
//! Both optimizers are deterministic given their seed, evaluate exactly
//! `population x generations` (GA) or `swarm x iterations` (PSO) candidates,
//! and never evaluate a point outside the bounds.

mod ga;
mod pso;

pub use ga::{
    arithmetic_crossover, arithmetic_crossover_with, ga_minimize, nonuniform_mutate,
    nonuniform_mutate_gene, roulette_select, GAConfig,
};
pub use pso::{pso_minimize, pso_step, pso_step_particle, PSOConfig, Swarm};

use std::io::Write;

use rand::Rng;

use crate::error::{Error, Result};

/// Per-dimension box bounds for the search space.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(intervals: &[(f64, f64)]) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidConfig("bounds must not be empty".into()));
        }
        for (i, &(lo, hi)) in intervals.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
                return Err(Error::InvalidConfig(format!(
                    "bounds[{i}] must be finite with lower < upper, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Bounds {
            lower: intervals.iter().map(|b| b.0).collect(),
            upper: intervals.iter().map(|b| b.1).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn range(&self, d: usize) -> f64 {
        self.upper[d] - self.lower[d]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .enumerate()
                .all(|(d, &v)| v >= self.lower[d] && v <= self.upper[d])
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (d, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[d], self.upper[d]);
        }
    }

    pub fn sample_uniform(&self, rng: &mut impl Rng) -> Vec<f64> {
        (0..self.dim())
            .map(|d| rng.random_range(self.lower[d]..self.upper[d]))
            .collect()
    }
}

/// Outcome of a minimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResult {
    /// Best point found, within bounds.
    pub point: Vec<f64>,
    /// Objective value at `point`.
    pub value: f64,
    /// Exact number of objective evaluations performed.
    pub evaluations: usize,
    /// Best-so-far objective value after each generation/iteration;
    /// monotone non-increasing.
    pub trace: Vec<f64>,
}

impl BestResult {
    /// Writes the trace as CSV with columns `iteration,best_value`.
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iteration,best_value")?;
        for (i, v) in self.trace.iter().enumerate() {
            writeln!(w, "{},{}", i + 1, v)?;
        }
        Ok(())
    }
}

/// Builds the starting population: caller-provided points (clamped into
/// bounds) first, uniform random samples for the rest.
fn initial_population(
    bounds: &Bounds,
    count: usize,
    initial_points: &[Vec<f64>],
    rng: &mut impl Rng,
) -> Vec<Vec<f64>> {
    let mut pop = Vec::with_capacity(count);
    for p in initial_points.iter().take(count) {
        let mut p = p.clone();
        assert_eq!(p.len(), bounds.dim(), "initial point has wrong dimension");
        bounds.clamp(&mut p);
        pop.push(p);
    }
    while pop.len() < count {
        pop.push(bounds.sample_uniform(rng));
    }
    pop
}

/// Compares objective values treating NaN as worse than anything.
fn better(a: f64, b: f64) -> bool {
    match (a.is_nan(), b.is_nan()) {
        (false, true) => true,
        (true, _) => false,
        _ => a < b,
    }
}
