//! Backpropagation, plain SGD on squared error, and a finite-difference
//! gradient verifier.

mod reference;

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dataset::{Dataset, Target};
use crate::fmt::real;
use crate::mlp::{Network, Topology};

use reference::Param;

#[derive(Debug, Error, PartialEq)]
pub enum TrainError {
    #[error("length mismatch: {0} predictions vs {1} targets")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("finite-difference step must be finite and > 0, got {0}")]
    InvalidStep(f64),
    #[error("training diverged: non-finite loss in epoch {0}")]
    Diverged(usize),
}

/// Plain SGD settings.
///
/// The step size of epoch `e` (0-based) is
/// `learning_rate · lr_decay^(e / (epochs - 1))`, so the last epoch runs at
/// `learning_rate · lr_decay`. With `normalize_targets` each network is fitted
/// to its targets divided by their training-set standard deviation and the
/// factor is folded back into the final linear transition afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub lr_decay: f64,
    pub batch_size: usize,
    pub shuffle_seed: u64,
    pub normalize_targets: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            learning_rate: 2e-2,
            lr_decay: 1e-2,
            batch_size: 1,
            shuffle_seed: 0,
            normalize_targets: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.epochs == 0 {
            return Err(TrainError::InvalidConfig("epochs must be >= 1".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(TrainError::InvalidConfig(format!(
                "learning rate must be finite and >= 0, got {}",
                self.learning_rate
            )));
        }
        if !(self.lr_decay.is_finite() && self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return Err(TrainError::InvalidConfig(format!(
                "lr decay must lie in (0, 1], got {}",
                self.lr_decay
            )));
        }
        if self.batch_size == 0 {
            return Err(TrainError::InvalidConfig("batch size must be >= 1".into()));
        }
        Ok(())
    }

    /// Step size used in `epoch`.
    pub fn epoch_learning_rate(&self, epoch: usize) -> f64 {
        if self.epochs <= 1 || self.lr_decay == 1.0 {
            return self.learning_rate;
        }
        let frac = epoch.min(self.epochs - 1) as f64 / (self.epochs - 1) as f64;
        self.learning_rate * self.lr_decay.powf(frac)
    }
}

/// Mean of squared differences.
pub fn loss_mse(predictions: &[f64], targets: &[f64]) -> Result<f64, TrainError> {
    if predictions.len() != targets.len() {
        return Err(TrainError::LengthMismatch(predictions.len(), targets.len()));
    }
    if predictions.is_empty() {
        return Err(TrainError::Empty);
    }
    let sum: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / predictions.len() as f64)
}

/// Gradient buffers shaped like a network's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    weights: Vec<Vec<f64>>,
    biases: Option<Vec<Vec<f64>>>,
}

impl Gradients {
    pub fn zeros_like(net: &Network) -> Self {
        let sizes = net.topology().sizes();
        Self {
            weights: sizes.windows(2).map(|p| vec![0.0; p[0] * p[1]]).collect(),
            biases: net
                .has_biases()
                .then(|| sizes[1..].iter().map(|&n| vec![0.0; n]).collect()),
        }
    }

    pub fn weights(&self, l: usize) -> &[f64] {
        &self.weights[l]
    }

    pub fn biases(&self, l: usize) -> Option<&[f64]> {
        self.biases.as_ref().map(|b| b[l].as_slice())
    }

    /// Same order as [`Network::params`].
    pub fn flat(&self) -> impl Iterator<Item = &f64> {
        let biases = self.biases.iter().flatten().flatten();
        self.weights.iter().flatten().chain(biases)
    }

    fn clear(&mut self) {
        let biases = self.biases.iter_mut().flatten().flatten();
        for g in self.weights.iter_mut().flatten().chain(biases) {
            *g = 0.0;
        }
    }
}

/// Reusable per-layer buffers for backpropagation.
#[derive(Debug, Clone)]
pub struct Backprop {
    pre: Vec<Vec<f64>>,
    out: Vec<Vec<f64>>,
    delta: Vec<f64>,
    delta_prev: Vec<f64>,
}

impl Backprop {
    pub fn new(topology: &Topology) -> Self {
        let sizes = topology.sizes();
        Self {
            pre: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            out: sizes.iter().map(|&n| vec![0.0; n]).collect(),
            delta: vec![0.0; topology.max_width()],
            delta_prev: vec![0.0; topology.max_width()],
        }
    }

    /// Adds `scale · ∇½(y - target)²` into `grads` and returns the prediction
    /// `y` made before any update.
    pub fn accumulate(
        &mut self,
        net: &Network,
        input: &[f64],
        target: f64,
        grads: &mut Gradients,
        scale: f64,
    ) -> f64 {
        let topo = net.topology();
        let sizes = topo.sizes();
        let acts = topo.activations();
        let depth = acts.len();
        assert_eq!(topo.output_dim(), 1, "backprop expects a scalar output");
        assert_eq!(input.len(), sizes[0], "input width");

        self.out[0].copy_from_slice(input);
        for l in 0..depth {
            let (n_in, n_out) = (sizes[l], sizes[l + 1]);
            let w = net.weights(l);
            let (before, after) = self.out.split_at_mut(l + 1);
            let src = &before[l];
            for j in 0..n_out {
                let mut z = net.biases(l).map_or(0.0, |b| b[j]);
                for (wi, xi) in w[j * n_in..(j + 1) * n_in].iter().zip(src) {
                    z += wi * xi;
                }
                self.pre[l + 1][j] = z;
                after[0][j] = acts[l].apply(z);
            }
        }
        let y = self.out[depth][0];

        // dL/dz at the output layer.
        self.delta[0] = (y - target) * acts[depth - 1].derivative(self.pre[depth][0]);
        for l in (0..depth).rev() {
            let (n_in, n_out) = (sizes[l], sizes[l + 1]);
            let src = &self.out[l];
            let gw = &mut grads.weights[l];
            for j in 0..n_out {
                let d = scale * self.delta[j];
                for (g, x) in gw[j * n_in..(j + 1) * n_in].iter_mut().zip(src) {
                    *g += d * x;
                }
            }
            if let Some(gb) = grads.biases.as_mut() {
                for (g, d) in gb[l].iter_mut().zip(&self.delta[..n_out]) {
                    *g += scale * d;
                }
            }
            if l > 0 {
                let w = net.weights(l);
                for i in 0..n_in {
                    let mut back = 0.0;
                    for j in 0..n_out {
                        back += w[j * n_in + i] * self.delta[j];
                    }
                    self.delta_prev[i] = back * acts[l - 1].derivative(self.pre[l][i]);
                }
                std::mem::swap(&mut self.delta, &mut self.delta_prev);
            }
        }
        y
    }
}

/// Exact gradient of `½(forward(net, input) - target)²`.
pub fn backprop_gradients(net: &Network, input: &[f64], target: f64) -> Gradients {
    let mut grads = Gradients::zeros_like(net);
    Backprop::new(net.topology()).accumulate(net, input, target, &mut grads, 1.0);
    grads
}

/// Largest relative error between backprop and central differences over every
/// parameter, with denominator `max(|analytic|, |numeric|, 1e-12)`.
///
/// The numeric side is evaluated in double-double arithmetic so its rounding
/// noise sits far below the tolerances used for f64 backprop.
pub fn gradient_check(
    net: &Network,
    input: &[f64],
    target: f64,
    step: f64,
) -> Result<f64, TrainError> {
    if !(step.is_finite() && step > 0.0) {
        return Err(TrainError::InvalidStep(step));
    }
    let analytic = backprop_gradients(net, input, target);
    let base = reference::forward(net, input);
    let sizes = net.topology().sizes();
    let mut worst: f64 = 0.0;
    let mut compare = |a: f64, param: Param| {
        let n = reference::central_difference(net, &base, param, target, step);
        let denom = a.abs().max(n.abs()).max(1e-12);
        worst = worst.max((a - n).abs() / denom);
    };
    for (l, &n_in) in sizes[..sizes.len() - 1].iter().enumerate() {
        for (k, &a) in analytic.weights(l).iter().enumerate() {
            compare(
                a,
                Param::Weight {
                    l,
                    j: k / n_in,
                    i: k % n_in,
                },
            );
        }
        if let Some(gb) = analytic.biases(l) {
            for (j, &a) in gb.iter().enumerate() {
                compare(a, Param::Bias { l, j });
            }
        }
    }
    Ok(worst)
}

/// Outcome of one pass over the training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    /// Mean of `(y - target)²` over the epoch, predictions taken before each
    /// sample's update.
    pub mean_loss: f64,
    /// Largest absolute change of any parameter over the epoch.
    pub max_weight_delta: f64,
}

/// One shuffled SGD pass; the order depends only on `shuffle_seed` and
/// `epoch`.
pub fn sgd_epoch(
    net: &mut Network,
    data: &Dataset,
    target: Target,
    config: &TrainConfig,
    epoch: usize,
) -> Result<EpochStats, TrainError> {
    sgd_epoch_scaled(net, data, target, config, epoch, 1.0)
}

/// As [`sgd_epoch`] against `target / scale`; the reported loss is
/// multiplied back by `scale²`.
fn sgd_epoch_scaled(
    net: &mut Network,
    data: &Dataset,
    target: Target,
    config: &TrainConfig,
    epoch: usize,
    scale: f64,
) -> Result<EpochStats, TrainError> {
    config.validate()?;
    if data.is_empty() {
        return Err(TrainError::Empty);
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.shuffle_seed);
    rng.set_stream(epoch as u64);
    order.shuffle(&mut rng);

    let start: Vec<f64> = net.params().copied().collect();
    let mut grads = Gradients::zeros_like(net);
    let mut bp = Backprop::new(net.topology());
    let mut loss_sum = 0.0;
    let lr = config.epoch_learning_rate(epoch);
    for batch in order.chunks(config.batch_size) {
        grads.clear();
        let weight = 1.0 / batch.len() as f64;
        for &i in batch {
            let s = &data.samples[i];
            let t = s.target(target) / scale;
            let y = bp.accumulate(net, &s.input(), t, &mut grads, weight);
            loss_sum += (y - t) * (y - t);
        }
        for (p, g) in net.params_mut().zip(grads.flat()) {
            *p -= lr * g;
        }
    }
    let mean_loss = loss_sum / data.len() as f64 * scale * scale;
    if !mean_loss.is_finite() || net.params().any(|p| !p.is_finite()) {
        return Err(TrainError::Diverged(epoch));
    }
    let max_weight_delta = net
        .params()
        .zip(&start)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(EpochStats {
        mean_loss,
        max_weight_delta,
    })
}

/// Root-mean-square error of `net` on one target of `data`.
pub fn rmse(net: &Network, data: &Dataset, target: Target) -> Result<f64, TrainError> {
    if data.is_empty() {
        return Err(TrainError::Empty);
    }
    let mut scratch = net.scratch();
    let sum: f64 = data
        .samples
        .iter()
        .map(|s| {
            let e = net.forward(&s.input(), &mut scratch) - s.target(target);
            e * e
        })
        .sum();
    Ok((sum / data.len() as f64).sqrt())
}

/// Population standard deviation of one target, or 1 when it is degenerate.
fn target_std(data: &Dataset, target: Target) -> f64 {
    let n = data.len() as f64;
    let mean = data.targets(target).sum::<f64>() / n;
    let var = data
        .targets(target)
        .map(|t| (t - mean) * (t - mean))
        .sum::<f64>()
        / n;
    let sd = var.sqrt();
    if sd.is_finite() && sd > 0.0 {
        sd
    } else {
        1.0
    }
}

/// Training history of one network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkReport {
    pub epoch_losses: Vec<f64>,
    pub test_rmse: f64,
    pub final_max_weight_delta: f64,
}

/// Runs `config.epochs` epochs of SGD on one target.
pub fn train_network(
    net: &mut Network,
    train_set: &Dataset,
    test_set: &Dataset,
    target: Target,
    config: &TrainConfig,
) -> Result<NetworkReport, TrainError> {
    config.validate()?;
    if train_set.is_empty() || test_set.is_empty() {
        return Err(TrainError::Empty);
    }
    let scale = if config.normalize_targets {
        target_std(train_set, target)
    } else {
        1.0
    };
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    let mut last_delta = 0.0;
    for epoch in 0..config.epochs {
        let stats = sgd_epoch_scaled(net, train_set, target, config, epoch, scale)?;
        epoch_losses.push(stats.mean_loss);
        last_delta = stats.max_weight_delta;
    }
    if scale != 1.0 {
        let last = net.topology().num_transitions() - 1;
        net.scale_transition(last, scale);
    }
    Ok(NetworkReport {
        epoch_losses,
        test_rmse: rmse(net, test_set, target)?,
        final_max_weight_delta: last_delta,
    })
}

/// Reports for the `f1` and `f2` estimators trained together.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub f1: NetworkReport,
    pub f2: NetworkReport,
    pub wall_time_s: f64,
}

impl TrainReport {
    pub fn network(&self, target: Target) -> &NetworkReport {
        match target {
            Target::F1 => &self.f1,
            Target::F2 => &self.f2,
        }
    }

    /// `epoch,mean_loss_f1,mean_loss_f2`, epochs counted from 1.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("epoch,mean_loss_f1,mean_loss_f2\n");
        for (i, (a, b)) in self
            .f1
            .epoch_losses
            .iter()
            .zip(&self.f2.epoch_losses)
            .enumerate()
        {
            out.push_str(&format!("{},{},{}\n", i + 1, real(*a), real(*b)));
        }
        out
    }

    pub fn summary_line(&self) -> String {
        let last = |r: &NetworkReport| r.epoch_losses.last().copied().unwrap_or(f64::NAN);
        format!(
            "epochs={} loss_f1={:.6e} loss_f2={:.6e} test_rmse_f1={:.6e} test_rmse_f2={:.6e} \
             max_weight_delta_f1={:.3e} max_weight_delta_f2={:.3e} wall_time_s={:.2}",
            self.f1.epoch_losses.len(),
            last(&self.f1),
            last(&self.f2),
            self.f1.test_rmse,
            self.f2.test_rmse,
            self.f1.final_max_weight_delta,
            self.f2.final_max_weight_delta,
            self.wall_time_s
        )
    }
}

/// Trains the two estimators on the same split with the same config.
pub fn train(
    net_f1: &mut Network,
    net_f2: &mut Network,
    train_set: &Dataset,
    test_set: &Dataset,
    config: &TrainConfig,
) -> Result<TrainReport, TrainError> {
    let started = Instant::now();
    let f1 = train_network(net_f1, train_set, test_set, Target::F1, config)?;
    let f2 = train_network(net_f2, train_set, test_set, Target::F2, config)?;
    Ok(TrainReport {
        f1,
        f2,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_dataset, Ranges, Sample};
    use crate::mlp::{Activation, InitScheme};
    use crate::{AeroParams, CoefficientTable};
    use rand::Rng;

    fn linear(sizes: Vec<usize>, weights: Vec<Vec<f64>>) -> Network {
        let acts = vec![Activation::Linear; sizes.len() - 1];
        Network::from_parts(Topology::new(sizes, acts).unwrap(), weights, None).unwrap()
    }

    fn one_sample(u: f64, w: f64, f1: f64) -> Dataset {
        Dataset {
            samples: vec![Sample { u, w, f1, f2: 0.0 }],
            seed: 0,
            ranges: Ranges {
                u_min: -100.0,
                u_max: 100.0,
                w_min: -100.0,
                w_max: 100.0,
            },
        }
    }

    #[test]
    fn mse_examples() {
        assert_eq!(loss_mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(loss_mse(&[0.0], &[2.0]).unwrap(), 4.0);
        assert_eq!(loss_mse(&[1.0, 3.0], &[0.0, 0.0]).unwrap(), 5.0);
        assert_eq!(
            loss_mse(&[1.0], &[1.0, 2.0]),
            Err(TrainError::LengthMismatch(1, 2))
        );
        assert_eq!(loss_mse(&[], &[]), Err(TrainError::Empty));
    }

    #[test]
    fn zero_network_has_zero_gradient() {
        let net = Network::init(Topology::standard(), 0, InitScheme::Zeros, false);
        let g = backprop_gradients(&net, &[7.0, 2.0], 3.5);
        assert!(g.flat().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_least_squares_gradient() {
        let (a, b, x, y, t) = (0.5, -1.5, 2.0, 3.0, 1.0);
        let net = linear(vec![2, 1], vec![vec![a, b]]);
        let g = backprop_gradients(&net, &[x, y], t);
        let r = a * x + b * y - t;
        assert_eq!(g.weights(0), &[r * x, r * y]);
    }

    #[test]
    fn gradient_check_random_standard_nets() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for seed in 0..3 {
            for biases in [false, true] {
                let net = Network::init(
                    Topology::standard(),
                    seed,
                    InitScheme::UniformXavier,
                    biases,
                );
                let input = [rng.gen_range(0.0..18.0), rng.gen_range(-1.0..4.0)];
                let err = gradient_check(&net, &input, rng.gen_range(-10.0..1.0), 1e-6).unwrap();
                assert!(err < 1e-6, "seed {seed}: {err}");
            }
        }
    }

    #[test]
    fn gradient_check_linear_is_exact() {
        let net = linear(
            vec![2, 3, 1],
            vec![vec![0.3, -0.2, 0.1, 0.7, -0.4, 0.25], vec![1.0, -2.0, 0.5]],
        );
        assert!(gradient_check(&net, &[1.5, -0.5], 2.0, 1e-6).unwrap() < 1e-10);
    }

    #[test]
    fn gradient_check_step_size_matters() {
        let net = Network::init(Topology::standard(), 4, InitScheme::UniformXavier, false);
        let input = [0.8, 0.3];
        let coarse = gradient_check(&net, &input, 0.5, 1e-1).unwrap();
        let fine = gradient_check(&net, &input, 0.5, 1e-6).unwrap();
        assert!(coarse > 1e3 * fine, "coarse {coarse} fine {fine}");
        assert!(gradient_check(&net, &input, 0.5, 0.0).is_err());
    }

    #[test]
    fn zero_input_gives_no_first_layer_signal() {
        let net = Network::init(Topology::standard(), 8, InitScheme::UniformXavier, false);
        let g = backprop_gradients(&net, &[0.0, 0.0], 0.0);
        assert!(g.weights(0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_learning_rate_leaves_network_unchanged() {
        let ds = one_sample(2.0, 1.0, 3.0);
        let mut net = Network::init(Topology::standard(), 2, InitScheme::UniformXavier, false);
        let before = net.clone();
        let cfg = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        let stats = sgd_epoch(&mut net, &ds, Target::F1, &cfg, 0).unwrap();
        assert_eq!(net, before);
        let y = before.forward(&[2.0, 1.0], &mut before.scratch());
        assert_eq!(stats.mean_loss, (y - 3.0) * (y - 3.0));
        assert_eq!(stats.max_weight_delta, 0.0);
    }

    #[test]
    fn single_step_matches_closed_form() {
        let (w, x, t, lr) = (0.7, 2.0, 5.0, 0.01);
        let mut net = linear(vec![1, 1], vec![vec![w]]);
        let mut grads = Gradients::zeros_like(&net);
        Backprop::new(net.topology()).accumulate(&net, &[x], t, &mut grads, 1.0);
        for (p, g) in net.params_mut().zip(grads.flat()) {
            *p -= lr * g;
        }
        assert!((net.weights(0)[0] - (w - lr * (w * x - t) * x)).abs() < 1e-15);
    }

    #[test]
    fn learning_rate_schedule_is_geometric() {
        let cfg = TrainConfig::default();
        assert_eq!(cfg.epoch_learning_rate(0), cfg.learning_rate);
        let last = cfg.epoch_learning_rate(cfg.epochs - 1);
        assert!((last - cfg.learning_rate * cfg.lr_decay).abs() < 1e-18);
        for e in 1..cfg.epochs {
            let r = cfg.epoch_learning_rate(e) / cfg.epoch_learning_rate(e - 1);
            assert!((r - cfg.lr_decay.powf(1.0 / 9.0)).abs() < 1e-12);
        }
        let flat = TrainConfig {
            lr_decay: 1.0,
            ..cfg
        };
        assert_eq!(flat.epoch_learning_rate(7), flat.learning_rate);
    }

    #[test]
    fn normalized_training_folds_scale_into_last_transition() {
        // Fitting t/s then scaling the last linear layer by s must equal
        // running the same updates by hand on a pre-scaled dataset.
        let (train_set, test_set) = small_set();
        let cfg = TrainConfig {
            epochs: 2,
            ..TrainConfig::default()
        };
        let init = Network::init(Topology::standard(), 9, InitScheme::UniformXavier, false);
        let mut a = init.clone();
        let report = train_network(&mut a, &train_set, &test_set, Target::F2, &cfg).unwrap();

        let s = target_std(&train_set, Target::F2);
        let mut scaled = train_set.clone();
        for x in &mut scaled.samples {
            x.f2 /= s;
        }
        let mut b = init;
        let mut losses = Vec::new();
        for e in 0..2 {
            losses.push(
                sgd_epoch(&mut b, &scaled, Target::F2, &cfg, e)
                    .unwrap()
                    .mean_loss
                    * s
                    * s,
            );
        }
        b.scale_transition(b.topology().num_transitions() - 1, s);
        let worst = a
            .params()
            .zip(b.params())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-12, "{worst}");
        for (x, y) in report.epoch_losses.iter().zip(&losses) {
            assert!((x - y).abs() <= 1e-12 * y.abs());
        }
    }

    #[test]
    fn sgd_epoch_single_sample_linear() {
        let (a, b, u, w, t, lr) = (0.2, -0.3, 1.5, 2.0, 4.0, 0.05);
        let mut net = linear(vec![2, 1], vec![vec![a, b]]);
        let ds = one_sample(u, w, t);
        let cfg = TrainConfig {
            learning_rate: lr,
            ..TrainConfig::default()
        };
        sgd_epoch(&mut net, &ds, Target::F1, &cfg, 0).unwrap();
        let r = a * u + b * w - t;
        let expect = [a - lr * r * u, b - lr * r * w];
        for (got, want) in net.weights(0).iter().zip(expect) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    fn small_set() -> (Dataset, Dataset) {
        let ds = generate_dataset(
            400,
            1,
            Ranges::default(),
            &AeroParams::default(),
            &CoefficientTable::default(),
        )
        .unwrap();
        ds.split(0.9, 2).unwrap()
    }

    #[test]
    fn training_is_deterministic() {
        let (train_set, test_set) = small_set();
        let cfg = TrainConfig {
            epochs: 2,
            batch_size: 4,
            shuffle_seed: 5,
            ..TrainConfig::default()
        };
        let run = || {
            let mut a = Network::init(Topology::standard(), 3, InitScheme::UniformXavier, false);
            let mut b = Network::init(Topology::standard(), 4, InitScheme::UniformXavier, false);
            let report = train(&mut a, &mut b, &train_set, &test_set, &cfg).unwrap();
            (a, b, report.to_csv_string())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn report_shape() {
        let (train_set, test_set) = small_set();
        let cfg = TrainConfig {
            epochs: 3,
            ..TrainConfig::default()
        };
        let mut a = Network::init(Topology::standard(), 3, InitScheme::UniformXavier, false);
        let mut b = Network::init(Topology::standard(), 4, InitScheme::UniformXavier, false);
        let report = train(&mut a, &mut b, &train_set, &test_set, &cfg).unwrap();
        assert_eq!(report.f1.epoch_losses.len(), 3);
        assert_eq!(report.f2.epoch_losses.len(), 3);
        let csv = report.to_csv_string();
        assert!(csv.starts_with("epoch,mean_loss_f1,mean_loss_f2\n1,"));
        assert_eq!(csv.lines().count(), 4);
        assert!(report.summary_line().contains("epochs=3"));
    }

    #[test]
    fn zero_targets_stay_solved() {
        let (train_set, test_set) = small_set();
        let zero = |d: &Dataset| Dataset {
            samples: d.samples.iter().map(|s| Sample { f1: 0.0, ..*s }).collect(),
            ..d.clone()
        };
        let mut net = Network::init(Topology::standard(), 0, InitScheme::Zeros, false);
        let report = train_network(
            &mut net,
            &zero(&train_set),
            &zero(&test_set),
            Target::F1,
            &TrainConfig::default(),
        )
        .unwrap();
        assert_eq!(report.epoch_losses.len(), 10);
        assert!(report.test_rmse <= 1e-3);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig {
                epochs: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                batch_size: 0,
                ..TrainConfig::default()
            },
            TrainConfig {
                learning_rate: f64::NAN,
                ..TrainConfig::default()
            },
            TrainConfig {
                learning_rate: -1.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                lr_decay: 0.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                lr_decay: 1.5,
                ..TrainConfig::default()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }
}
