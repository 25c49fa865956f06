//! Feed-forward multilayer perceptron: forward pass, error measures, exact
//! gradients, and a plain-text serialization format.
//!
//! Networks are immutable values; training (see [`train`]) produces a new
//! network. The per-pattern loss is the sum of squared output errors
//! `sse = 1/2 * sum((y - t)^2)` and the batch objective is its mean over
//! patterns.

mod train;

pub use train::{train, TrainConfig, TrainMethod};

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Neuron nonlinearity applied to each layer's affine output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    /// tanh(c * a); the gain c must be positive.
    TanhC(f64),
    /// 1 / (1 + exp(-a)), strictly inside (0, 1).
    Sigmoid,
    /// Pass-through.
    Identity,
}

impl Activation {
    pub fn apply(self, a: f64) -> f64 {
        match self {
            Activation::TanhC(c) => (c * a).tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-a).exp()),
            Activation::Identity => a,
        }
    }

    /// Derivative dz/da expressed through the activation output z.
    fn derivative_from_output(self, z: f64) -> f64 {
        match self {
            Activation::TanhC(c) => c * (1.0 - z * z),
            Activation::Sigmoid => z * (1.0 - z),
            Activation::Identity => 1.0,
        }
    }

    fn validate(self) -> Result<()> {
        if let Activation::TanhC(c) = self {
            if !(c > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "tanh gain c must be positive, got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// Shape and nonlinearity of one dense layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerSpec {
    pub fan_in: usize,
    pub fan_out: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(fan_in: usize, fan_out: usize, activation: Activation) -> Result<Self> {
        if fan_in == 0 || fan_out == 0 {
            return Err(Error::InvalidConfig(format!(
                "layer dims must be >= 1, got {fan_in}x{fan_out}"
            )));
        }
        activation.validate()?;
        Ok(LayerSpec {
            fan_in,
            fan_out,
            activation,
        })
    }
}

/// One dense layer: weight matrix (fan_out x fan_in) and bias vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub spec: LayerSpec,
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

impl Layer {
    pub fn new(spec: LayerSpec, weights: Array2<f64>, biases: Array1<f64>) -> Result<Self> {
        if weights.nrows() != spec.fan_out || weights.ncols() != spec.fan_in {
            return Err(Error::DimensionMismatch {
                what: "layer weight matrix",
                expected: spec.fan_out * spec.fan_in,
                found: weights.len(),
            });
        }
        if biases.len() != spec.fan_out {
            return Err(Error::DimensionMismatch {
                what: "layer bias vector",
                expected: spec.fan_out,
                found: biases.len(),
            });
        }
        Ok(Layer {
            spec,
            weights,
            biases,
        })
    }
}

/// Layered perceptron with chained dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
}

impl Network {
    /// Builds a network with seeded uniform initialization in
    /// [-1/sqrt(fan_in), +1/sqrt(fan_in)] for weights and biases.
    pub fn new(specs: &[LayerSpec], seed: u64) -> Result<Self> {
        check_chain(specs)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = specs
            .iter()
            .map(|&spec| {
                let bound = 1.0 / (spec.fan_in as f64).sqrt();
                let weights = Array2::from_shape_fn((spec.fan_out, spec.fan_in), |_| {
                    rng.random_range(-bound..bound)
                });
                let biases = Array1::from_shape_fn(spec.fan_out, |_| rng.random_range(-bound..bound));
                Layer {
                    spec,
                    weights,
                    biases,
                }
            })
            .collect();
        Ok(Network { layers })
    }

    /// Wraps hand-built layers (used for fixed-weight toy networks).
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        let specs: Vec<LayerSpec> = layers.iter().map(|l| l.spec).collect();
        check_chain(&specs)?;
        Ok(Network { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].spec.fan_in
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].spec.fan_out
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.spec.fan_in * l.spec.fan_out + l.spec.fan_out)
            .sum()
    }

    /// Runs the forward pass: per layer, a = W x + b then the activation.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "network input",
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let mut current = Array1::from_vec(x.to_vec());
        for layer in &self.layers {
            let mut a = layer.weights.dot(&current) + &layer.biases;
            a.mapv_inplace(|v| layer.spec.activation.apply(v));
            current = a;
        }
        Ok(current.to_vec())
    }

    /// Forward pass retaining every layer's activation output (needed for
    /// backpropagation). Index 0 holds the input itself.
    fn forward_trace(&self, x: &[f64]) -> Result<Vec<Array1<f64>>> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                what: "network input",
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(Array1::from_vec(x.to_vec()));
        for layer in &self.layers {
            let mut a = layer.weights.dot(acts.last().unwrap()) + &layer.biases;
            a.mapv_inplace(|v| layer.spec.activation.apply(v));
            acts.push(a);
        }
        Ok(acts)
    }

    /// Flattens all parameters: per layer, weights row-major then biases.
    pub fn params(&self) -> Array1<f64> {
        let mut flat = Vec::with_capacity(self.num_params());
        for layer in &self.layers {
            flat.extend(layer.weights.iter());
            flat.extend(layer.biases.iter());
        }
        Array1::from_vec(flat)
    }

    /// Returns a copy of the network with parameters replaced from a flat
    /// vector in [`Network::params`] order.
    pub fn with_params(&self, flat: &Array1<f64>) -> Result<Network> {
        if flat.len() != self.num_params() {
            return Err(Error::DimensionMismatch {
                what: "parameter vector",
                expected: self.num_params(),
                found: flat.len(),
            });
        }
        let mut out = self.clone();
        let mut offset = 0;
        for layer in &mut out.layers {
            for w in layer.weights.iter_mut() {
                *w = flat[offset];
                offset += 1;
            }
            for b in layer.biases.iter_mut() {
                *b = flat[offset];
                offset += 1;
            }
        }
        Ok(out)
    }

    /// Serializes to the plain-text network format. Numbers carry 17
    /// significant digits, which round-trips every f64 exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "layers={}", self.layers.len());
        for layer in &self.layers {
            match layer.spec.activation {
                Activation::TanhC(c) => {
                    let _ = writeln!(
                        out,
                        "spec {} {} tanh {}",
                        layer.spec.fan_in,
                        layer.spec.fan_out,
                        fmt_f64(c)
                    );
                }
                Activation::Sigmoid => {
                    let _ = writeln!(out, "spec {} {} sigmoid", layer.spec.fan_in, layer.spec.fan_out);
                }
                Activation::Identity => {
                    let _ = writeln!(out, "spec {} {} identity", layer.spec.fan_in, layer.spec.fan_out);
                }
            }
            for row in layer.weights.rows() {
                let line: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
            let biases: Vec<String> = layer.biases.iter().map(|&v| fmt_f64(v)).collect();
            let _ = writeln!(out, "{}", biases.join(" "));
        }
        out
    }

    /// Parses the format produced by [`Network::to_text`]. Extra trailing
    /// lines are handed back to the caller (model files append sections).
    pub fn from_lines<'a, I>(lines: &mut I) -> Result<Network>
    where
        I: Iterator<Item = &'a str>,
    {
        let header = lines
            .next()
            .ok_or_else(|| Error::ModelFormat("missing layers= header".into()))?;
        let n: usize = header
            .strip_prefix("layers=")
            .ok_or_else(|| Error::ModelFormat(format!("expected layers=<n>, got {header:?}")))?
            .trim()
            .parse()
            .map_err(|e| Error::ModelFormat(format!("bad layer count: {e}")))?;
        if n == 0 {
            return Err(Error::ModelFormat("network must have at least one layer".into()));
        }
        let mut layers = Vec::with_capacity(n);
        for _ in 0..n {
            let spec_line = lines
                .next()
                .ok_or_else(|| Error::ModelFormat("missing spec line".into()))?;
            let tokens: Vec<&str> = spec_line.split_whitespace().collect();
            if tokens.len() < 4 || tokens[0] != "spec" {
                return Err(Error::ModelFormat(format!("bad spec line: {spec_line:?}")));
            }
            let fan_in: usize = tokens[1]
                .parse()
                .map_err(|e| Error::ModelFormat(format!("bad fan_in: {e}")))?;
            let fan_out: usize = tokens[2]
                .parse()
                .map_err(|e| Error::ModelFormat(format!("bad fan_out: {e}")))?;
            let activation = match tokens[3] {
                "tanh" => {
                    let c: f64 = tokens
                        .get(4)
                        .ok_or_else(|| Error::ModelFormat("tanh needs a gain".into()))?
                        .parse()
                        .map_err(|e| Error::ModelFormat(format!("bad tanh gain: {e}")))?;
                    Activation::TanhC(c)
                }
                "sigmoid" => Activation::Sigmoid,
                "identity" => Activation::Identity,
                other => return Err(Error::ModelFormat(format!("unknown activation {other:?}"))),
            };
            let spec = LayerSpec::new(fan_in, fan_out, activation)?;
            let mut weights = Array2::zeros((fan_out, fan_in));
            for r in 0..fan_out {
                let line = lines
                    .next()
                    .ok_or_else(|| Error::ModelFormat("missing weight row".into()))?;
                let row = parse_f64_row(line, fan_in)?;
                for (c_ix, v) in row.into_iter().enumerate() {
                    weights[[r, c_ix]] = v;
                }
            }
            let bias_line = lines
                .next()
                .ok_or_else(|| Error::ModelFormat("missing bias row".into()))?;
            let biases = Array1::from_vec(parse_f64_row(bias_line, fan_out)?);
            layers.push(Layer::new(spec, weights, biases)?);
        }
        Network::from_layers(layers)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path.as_ref(), self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Network> {
        let text = fs::read_to_string(path.as_ref())?;
        let mut lines = text.lines();
        Network::from_lines(&mut lines)
    }
}

fn check_chain(specs: &[LayerSpec]) -> Result<()> {
    if specs.is_empty() {
        return Err(Error::InvalidConfig("network needs at least one layer".into()));
    }
    for spec in specs {
        LayerSpec::new(spec.fan_in, spec.fan_out, spec.activation)?;
    }
    for pair in specs.windows(2) {
        if pair[0].fan_out != pair[1].fan_in {
            return Err(Error::DimensionMismatch {
                what: "adjacent layer dims",
                expected: pair[0].fan_out,
                found: pair[1].fan_in,
            });
        }
    }
    Ok(())
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_f64_row(line: &str, expected: usize) -> Result<Vec<f64>> {
    let vals: std::result::Result<Vec<f64>, _> =
        line.split_whitespace().map(|t| t.parse::<f64>()).collect();
    let vals = vals.map_err(|e| Error::ModelFormat(format!("bad number: {e}")))?;
    if vals.len() != expected {
        return Err(Error::ModelFormat(format!(
            "expected {expected} numbers per row, found {}",
            vals.len()
        )));
    }
    Ok(vals)
}

/// One training pattern: input and target.
pub type Pattern = (Vec<f64>, Vec<f64>);

/// Sum of squared output errors for one pattern: 1/2 * sum((y - t)^2).
pub fn sse(y: &[f64], t: &[f64]) -> Result<f64> {
    if y.len() != t.len() {
        return Err(Error::DimensionMismatch {
            what: "sse operands",
            expected: t.len(),
            found: y.len(),
        });
    }
    Ok(0.5 * y.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
}

/// Mean of [`sse`] over a non-empty batch of patterns.
pub fn average_error(net: &Network, batch: &[Pattern]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut total = 0.0;
    for (x, t) in batch {
        let y = net.forward(x)?;
        total += sse(&y, t)?;
    }
    Ok(total / batch.len() as f64)
}

/// Exact analytic gradient of [`average_error`] with respect to every
/// weight and bias, flattened in [`Network::params`] order.
pub fn gradient(net: &Network, batch: &[Pattern]) -> Result<Array1<f64>> {
    Ok(loss_and_gradient(net, batch)?.1)
}

/// Backpropagation over the batch, returning (average error, gradient).
pub(crate) fn loss_and_gradient(net: &Network, batch: &[Pattern]) -> Result<(f64, Array1<f64>)> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n_layers = net.layers.len();
    let mut grad_w: Vec<Array2<f64>> = net
        .layers
        .iter()
        .map(|l| Array2::zeros((l.spec.fan_out, l.spec.fan_in)))
        .collect();
    let mut grad_b: Vec<Array1<f64>> = net
        .layers
        .iter()
        .map(|l| Array1::zeros(l.spec.fan_out))
        .collect();
    let mut total_loss = 0.0;

    for (x, t) in batch {
        let acts = net.forward_trace(x)?;
        let output = &acts[n_layers];
        if t.len() != output.len() {
            return Err(Error::DimensionMismatch {
                what: "target vector",
                expected: output.len(),
                found: t.len(),
            });
        }
        let err: Array1<f64> =
            Array1::from_iter(output.iter().zip(t).map(|(y, tv)| y - tv));
        total_loss += 0.5 * err.iter().map(|e| e * e).sum::<f64>();

        // delta at the output layer, then walk backwards
        let mut delta: Array1<f64> = Array1::from_iter(
            err.iter()
                .zip(output.iter())
                .map(|(e, z)| e * net.layers[n_layers - 1].spec.activation.derivative_from_output(*z)),
        );
        for l in (0..n_layers).rev() {
            let input = &acts[l];
            for r in 0..net.layers[l].spec.fan_out {
                let d = delta[r];
                grad_b[l][r] += d;
                for c in 0..net.layers[l].spec.fan_in {
                    grad_w[l][[r, c]] += d * input[c];
                }
            }
            if l > 0 {
                let back = net.layers[l].weights.t().dot(&delta);
                delta = Array1::from_iter(back.iter().zip(acts[l].iter()).map(|(g, z)| {
                    g * net.layers[l - 1].spec.activation.derivative_from_output(*z)
                }));
            }
        }
    }

    let scale = 1.0 / batch.len() as f64;
    let mut flat = Vec::with_capacity(net.num_params());
    for l in 0..n_layers {
        flat.extend(grad_w[l].iter().map(|g| g * scale));
        flat.extend(grad_b[l].iter().map(|g| g * scale));
    }
    Ok((total_loss * scale, Array1::from_vec(flat)))
}
