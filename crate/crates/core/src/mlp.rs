//! Fixed-topology multilayer perceptron.
//!
//! The forward pass is allocation-free: it ping-pongs between two buffers of
//! the widest layer's size held in a caller-owned [`Scratch`]. A [`Network`]
//! is immutable during inference and can be shared between threads, each with
//! its own scratch.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::fmt::real;

/// Externally quoted weight count for the standard topology.
///
/// A fully connected reading of the topology gives 1730 weights and no
/// layer arrangement of it yields 1712. The constant exists so tests can
/// assert the mismatch instead of hiding it.
pub const PUBLISHED_WEIGHT_COUNT: usize = 1712;

const WEIGHT_FILE_MAGIC: &str = "MLPWF";
const WEIGHT_FILE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum MlpError {
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("unknown activation `{0}`")]
    UnknownActivation(String),
    #[error("unsupported weight file header `{0}`")]
    VersionMismatch(String),
    #[error("weight file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Linear => x,
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative at pre-activation `z`; for tanh this is `sech² z`, the
    /// same quantity as `1 - tanh² z` without the cancellation near ±1.
    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Tanh => {
                let c = z.cosh();
                1.0 / (c * c)
            }
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Activation::Linear => "linear",
            Activation::Tanh => "tanh",
        })
    }
}

impl FromStr for Activation {
    type Err = MlpError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Activation::Linear),
            "tanh" => Ok(Activation::Tanh),
            other => Err(MlpError::UnknownActivation(other.to_string())),
        }
    }
}

/// Layer widths (input first) and one activation per non-input layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    sizes: Vec<usize>,
    activations: Vec<Activation>,
}

impl Topology {
    pub fn new(sizes: Vec<usize>, activations: Vec<Activation>) -> Result<Self, MlpError> {
        if sizes.len() < 2 {
            return Err(MlpError::InvalidTopology(format!(
                "need at least 2 layers, got {}",
                sizes.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(MlpError::InvalidTopology(
                "layer sizes must be positive".into(),
            ));
        }
        if activations.len() != sizes.len() - 1 {
            return Err(MlpError::InvalidTopology(format!(
                "{} layers need {} activations, got {}",
                sizes.len(),
                sizes.len() - 1,
                activations.len()
            )));
        }
        Ok(Self { sizes, activations })
    }

    /// 2 → 10 → 20 → 50 → 10 → 1 with tanh on the second and third layers.
    pub fn standard() -> Self {
        use Activation::*;
        Self::new(
            vec![2, 10, 20, 50, 10, 1],
            vec![Linear, Tanh, Tanh, Linear, Linear],
        )
        .expect("default topology is valid")
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activations(&self) -> &[Activation] {
        &self.activations
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        self.sizes[self.sizes.len() - 1]
    }

    pub fn max_width(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn num_transitions(&self) -> usize {
        self.activations.len()
    }

    /// `Σ nᵢ·nᵢ₊₁`, plus `Σ nᵢ₊₁` with biases.
    pub fn param_count(&self, biases: bool) -> usize {
        let weights: usize = self.sizes.windows(2).map(|w| w[0] * w[1]).sum();
        let bias: usize = self.sizes[1..].iter().sum();
        if biases {
            weights + bias
        } else {
            weights
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitScheme {
    Zeros,
    /// Uniform in `±sqrt(6 / (n_in + n_out))` per transition.
    UniformXavier,
}

/// Weights (row-major, destination × source) per transition, optional biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    topology: Topology,
    weights: Vec<Vec<f64>>,
    biases: Option<Vec<Vec<f64>>>,
}

/// Two ping-pong buffers sized to the widest layer.
#[derive(Debug, Clone)]
pub struct Scratch {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Scratch {
    pub fn new(topology: &Topology) -> Self {
        let width = topology.max_width();
        Self {
            a: vec![0.0; width],
            b: vec![0.0; width],
        }
    }

    /// Number of `f64` slots held.
    pub fn len(&self) -> usize {
        self.a.len() + self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Network {
    /// Builds a network from explicit parameters, checking shapes and values.
    pub fn from_parts(
        topology: Topology,
        weights: Vec<Vec<f64>>,
        biases: Option<Vec<Vec<f64>>>,
    ) -> Result<Self, MlpError> {
        let sizes = topology.sizes();
        if weights.len() != topology.num_transitions() {
            return Err(MlpError::ShapeMismatch(format!(
                "expected {} weight matrices, got {}",
                topology.num_transitions(),
                weights.len()
            )));
        }
        for (l, w) in weights.iter().enumerate() {
            let expected = sizes[l] * sizes[l + 1];
            if w.len() != expected {
                return Err(MlpError::ShapeMismatch(format!(
                    "transition {l}: expected {expected} weights, got {}",
                    w.len()
                )));
            }
            if let Some(i) = w.iter().position(|v| !v.is_finite()) {
                return Err(MlpError::NonFinite(format!("transition {l} weight {i}")));
            }
        }
        if let Some(bs) = &biases {
            if bs.len() != topology.num_transitions() {
                return Err(MlpError::ShapeMismatch(format!(
                    "expected {} bias vectors, got {}",
                    topology.num_transitions(),
                    bs.len()
                )));
            }
            for (l, b) in bs.iter().enumerate() {
                if b.len() != sizes[l + 1] {
                    return Err(MlpError::ShapeMismatch(format!(
                        "layer {}: expected {} biases, got {}",
                        l + 1,
                        sizes[l + 1],
                        b.len()
                    )));
                }
                if let Some(i) = b.iter().position(|v| !v.is_finite()) {
                    return Err(MlpError::NonFinite(format!("layer {} bias {i}", l + 1)));
                }
            }
        }
        Ok(Self {
            topology,
            weights,
            biases,
        })
    }

    /// Deterministic initialisation; biases, when enabled, start at zero.
    pub fn init(topology: Topology, seed: u64, scheme: InitScheme, biases: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = topology
            .sizes()
            .windows(2)
            .map(|pair| {
                let (n_in, n_out) = (pair[0], pair[1]);
                match scheme {
                    InitScheme::Zeros => vec![0.0; n_in * n_out],
                    InitScheme::UniformXavier => {
                        let limit = (6.0 / (n_in + n_out) as f64).sqrt();
                        (0..n_in * n_out)
                            .map(|_| rng.gen_range(-limit..=limit))
                            .collect()
                    }
                }
            })
            .collect();
        let biases = biases.then(|| {
            topology.sizes()[1..]
                .iter()
                .map(|&n| vec![0.0; n])
                .collect()
        });
        Self {
            topology,
            weights,
            biases,
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    /// Row-major weights of transition `l` (layer `l` → layer `l + 1`).
    pub fn weights(&self, l: usize) -> &[f64] {
        &self.weights[l]
    }

    pub fn biases(&self, l: usize) -> Option<&[f64]> {
        self.biases.as_ref().map(|b| b[l].as_slice())
    }

    pub fn has_biases(&self) -> bool {
        self.biases.is_some()
    }

    pub fn param_count(&self) -> usize {
        self.topology.param_count(self.has_biases())
    }

    pub fn scratch(&self) -> Scratch {
        Scratch::new(&self.topology)
    }

    /// Visits every parameter mutably: weights transition by transition, then
    /// biases. Matches the order of [`crate::train::Gradients::flat`].
    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        let biases = self.biases.iter_mut().flatten().flatten();
        self.weights.iter_mut().flatten().chain(biases)
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        let biases = self.biases.iter().flatten().flatten();
        self.weights.iter().flatten().chain(biases)
    }

    /// Multiplies every weight of transition `l` by `k`.
    pub fn scale_transition(&mut self, l: usize, k: f64) {
        for w in &mut self.weights[l] {
            *w *= k;
        }
    }

    /// Forward pass for a single-output network. Does not allocate.
    ///
    /// Panics if `input` or `scratch` do not fit the topology.
    pub fn forward(&self, input: &[f64], scratch: &mut Scratch) -> f64 {
        self.forward_into(input, scratch)[0]
    }

    /// Forward pass returning the full output layer, borrowed from `scratch`.
    pub fn forward_into<'s>(&self, input: &[f64], scratch: &'s mut Scratch) -> &'s [f64] {
        let sizes = self.topology.sizes();
        assert_eq!(input.len(), sizes[0], "input width");
        assert!(
            scratch.a.len() >= self.topology.max_width(),
            "scratch too small for topology"
        );
        scratch.a[..sizes[0]].copy_from_slice(input);
        let (mut src, mut dst) = (&mut scratch.a, &mut scratch.b);
        for (l, act) in self.topology.activations().iter().enumerate() {
            let (n_in, n_out) = (sizes[l], sizes[l + 1]);
            let w = &self.weights[l];
            for j in 0..n_out {
                let row = &w[j * n_in..(j + 1) * n_in];
                let mut z = match &self.biases {
                    Some(b) => b[l][j],
                    None => 0.0,
                };
                for (wi, xi) in row.iter().zip(&src[..n_in]) {
                    z += wi * xi;
                }
                dst[j] = act.apply(z);
            }
            std::mem::swap(&mut src, &mut dst);
        }
        &src[..self.topology.output_dim()]
    }

    /// Serialises to the versioned text weight format.
    pub fn to_weight_string(&self) -> String {
        let t = &self.topology;
        let mut out = format!("{WEIGHT_FILE_MAGIC} {WEIGHT_FILE_VERSION}\n");
        let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(" ");
        out.push_str(&join(&mut t.sizes().iter().map(|s| s.to_string())));
        out.push('\n');
        out.push_str(&join(&mut t.activations().iter().map(|a| a.to_string())));
        out.push('\n');
        out.push_str(if self.has_biases() {
            "biases 1\n"
        } else {
            "biases 0\n"
        });
        for v in self.params() {
            out.push_str(&real(*v));
            out.push('\n');
        }
        out
    }

    pub fn from_weight_str(text: &str) -> Result<Self, MlpError> {
        let mut lines = text.lines().enumerate();
        let mut next = |what: &str| {
            lines
                .next()
                .map(|(i, l)| (i + 1, l.trim()))
                .ok_or_else(|| MlpError::ShapeMismatch(format!("file ends before {what}")))
        };

        let (_, header) = next("header")?;
        if header != format!("{WEIGHT_FILE_MAGIC} {WEIGHT_FILE_VERSION}") {
            return Err(MlpError::VersionMismatch(header.to_string()));
        }
        let (line, sizes) = next("layer sizes")?;
        let sizes = sizes
            .split_whitespace()
            .map(|s| {
                s.parse::<usize>().map_err(|_| MlpError::Parse {
                    line,
                    msg: format!("bad layer size `{s}`"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (_, tags) = next("activation tags")?;
        let activations = tags
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<Activation>, _>>()?;
        let topology = Topology::new(sizes, activations)?;
        let (line, flag) = next("bias flag")?;
        let biases = match flag {
            "biases 0" => false,
            "biases 1" => true,
            other => {
                return Err(MlpError::Parse {
                    line,
                    msg: format!("expected `biases 0|1`, got `{other}`"),
                })
            }
        };

        let mut read_block = |count: usize| -> Result<Vec<f64>, MlpError> {
            let mut block = Vec::with_capacity(count);
            for _ in 0..count {
                let (line, v) = next("all parameters")?;
                let v: f64 = v.parse().map_err(|_| MlpError::Parse {
                    line,
                    msg: format!("not a number: `{v}`"),
                })?;
                if !v.is_finite() {
                    return Err(MlpError::NonFinite(format!("line {line}")));
                }
                block.push(v);
            }
            Ok(block)
        };
        let sizes = topology.sizes().to_vec();
        let weights = sizes
            .windows(2)
            .map(|p| read_block(p[0] * p[1]))
            .collect::<Result<Vec<_>, _>>()?;
        let bias_vecs = if biases {
            Some(
                sizes[1..]
                    .iter()
                    .map(|&n| read_block(n))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        } else {
            None
        };
        if let Some((line, extra)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(MlpError::ShapeMismatch(format!(
                "unexpected trailing data at line {}: `{extra}`",
                line + 1
            )));
        }
        Self::from_parts(topology, weights, bias_vecs)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MlpError> {
        fs::write(path, self.to_weight_string())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MlpError> {
        Self::from_weight_str(&fs::read_to_string(path)?)
    }
}
