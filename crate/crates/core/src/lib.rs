//! Recovery of missing dissolved-gas-analysis sensor values.
//!
//! The pipeline: train an autoencoder on complete gas records, then treat a
//! record's missing entries as free variables and search for the values that
//! minimize the autoencoder's reconstruction error, using either a
//! real-coded genetic algorithm or gbest particle swarm optimization.
//! Completed records are classified Acceptable/Unusable by a second
//! perceptron, and a sweep harness measures how estimation and
//! classification accuracy degrade as more variables go missing at once.
//!
//! Modules:
//! - [`data`]: record and dataset types, normalization, CSV I/O.
//! - [`synth`]: correlated synthetic data with rule-based labels and
//!   controlled missingness.
//! - [`mlp`]: feed-forward perceptron, exact gradients, GD and SCG trainers.
//! - [`autoenc`]: the bottleneck autoencoder and its known-components error.
//! - [`evo`]: bounded real-vector GA and PSO minimizers.
//! - [`imputer`]: the optimization loop that fills missing values, plus
//!   naive baselines and an exhaustive grid oracle.
//! - [`classifier`]: the condition classifier.
//! - [`bench`]: the accuracy/runtime sweep over k missing variables.

pub mod autoenc;
pub mod bench;
pub mod classifier;
pub mod data;
pub mod error;
pub mod evo;
pub mod imputer;
pub mod mlp;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
