//! Flat `key = value` run configuration. Blank lines and `#` comments are
//! ignored; command-line flags are applied on top of the file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use tailsitter::aero::AeroParams;
use tailsitter::dataset::{Ranges, DEFAULT_SAMPLES, DEFAULT_TRAIN_FRACTION};
use tailsitter::dynamics::DEFAULT_DT;
use tailsitter::train::TrainConfig;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub data_seed: Option<u64>,
    pub init_seed: Option<u64>,
    pub shuffle_seed: Option<u64>,
    pub split_seed: Option<u64>,
    pub samples: usize,
    pub train_fraction: f64,
    pub ranges: Ranges,
    pub train: TrainConfig,
    pub biases: bool,
    pub params: AeroParams,
    pub dt: f64,
    pub dataset: PathBuf,
    pub weights_f1: PathBuf,
    pub weights_f2: PathBuf,
    pub table: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub zero_nets: bool,
    pub fd_step: f64,
    pub grad_nets: usize,
    pub grad_inputs: usize,
    pub bench_calls: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            data_seed: None,
            init_seed: None,
            shuffle_seed: None,
            split_seed: None,
            samples: DEFAULT_SAMPLES,
            train_fraction: DEFAULT_TRAIN_FRACTION,
            ranges: Ranges::default(),
            train: TrainConfig::default(),
            biases: false,
            params: AeroParams::default(),
            dt: DEFAULT_DT,
            dataset: "dataset.csv".into(),
            weights_f1: "weights_f1.txt".into(),
            weights_f2: "weights_f2.txt".into(),
            table: None,
            out: None,
            zero_nets: false,
            fd_step: 1e-6,
            grad_nets: 1,
            grad_inputs: 10,
            bench_calls: 1_000_000,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("bad value for `{key}`: {value:?}")))
}

impl RunConfig {
    pub fn data_seed(&self) -> u64 {
        self.data_seed.unwrap_or(self.seed)
    }

    pub fn split_seed(&self) -> u64 {
        self.split_seed.unwrap_or(self.seed.wrapping_add(1))
    }

    /// Seed of the `f1` network; `f2` uses the next one.
    pub fn init_seed(&self) -> u64 {
        self.init_seed.unwrap_or(self.seed.wrapping_add(2))
    }

    pub fn shuffle_seed(&self) -> u64 {
        self.shuffle_seed.unwrap_or(self.seed.wrapping_add(4))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            shuffle_seed: self.shuffle_seed(),
            ..self.train
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "seed" => self.seed = parse(key, value)?,
            "data_seed" => self.data_seed = Some(parse(key, value)?),
            "init_seed" => self.init_seed = Some(parse(key, value)?),
            "shuffle_seed" => self.shuffle_seed = Some(parse(key, value)?),
            "split_seed" => self.split_seed = Some(parse(key, value)?),
            "samples" => self.samples = parse(key, value)?,
            "train_fraction" => self.train_fraction = parse(key, value)?,
            "u_min" => self.ranges.u_min = parse(key, value)?,
            "u_max" => self.ranges.u_max = parse(key, value)?,
            "w_min" => self.ranges.w_min = parse(key, value)?,
            "w_max" => self.ranges.w_max = parse(key, value)?,
            "epochs" => self.train.epochs = parse(key, value)?,
            "lr" => self.train.learning_rate = parse(key, value)?,
            "lr_decay" => self.train.lr_decay = parse(key, value)?,
            "batch_size" => self.train.batch_size = parse(key, value)?,
            "normalize_targets" => self.train.normalize_targets = parse(key, value)?,
            "biases" => self.biases = parse(key, value)?,
            "mass" => self.params.mass = parse(key, value)?,
            "inertia_y" => self.params.inertia_y = parse(key, value)?,
            "wing_area" => self.params.wing_area = parse(key, value)?,
            "air_density" => self.params.air_density = parse(key, value)?,
            "gravity" => self.params.gravity = parse(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "dataset" => self.dataset = value.into(),
            "weights_f1" => self.weights_f1 = value.into(),
            "weights_f2" => self.weights_f2 = value.into(),
            "table" => self.table = Some(value.into()),
            "out" => self.out = Some(value.into()),
            "zero_nets" => self.zero_nets = parse(key, value)?,
            "fd_step" => self.fd_step = parse(key, value)?,
            "grad_nets" => self.grad_nets = parse(key, value)?,
            "grad_inputs" => self.grad_inputs = parse(key, value)?,
            "bench_calls" => self.bench_calls = parse(key, value)?,
            _ => return Err(CliError::Config(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("config line {}: expected key=value", n + 1))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        self.apply_text(&text)
    }

    /// Range and value checks shared by every command.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate()?;
        self.ranges
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        self.train
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(CliError::Config(format!(
                "dt must be finite and > 0, got {}",
                self.dt
            )));
        }
        if self.samples == 0 {
            return Err(CliError::Config("samples must be > 0".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(CliError::Config(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if !(self.fd_step.is_finite() && self.fd_step > 0.0) {
            return Err(CliError::Config("fd_step must be finite and > 0".into()));
        }
        if self.grad_nets == 0 || self.grad_inputs == 0 || self.bench_calls == 0 {
            return Err(CliError::Config("counts must be > 0".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_values_and_comments() {
        let mut c = RunConfig::default();
        c.apply_text("# run\nseed = 7\nlr=0.5 # fast\n\nout = a/b.csv\nnormalize_targets=false\n")
            .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.train.learning_rate, 0.5);
        assert_eq!(c.out, Some(PathBuf::from("a/b.csv")));
        assert!(!c.train.normalize_targets);
        assert_eq!(c.data_seed(), 7);
        assert_eq!(c.init_seed(), 9);
    }

    #[test]
    fn bad_input_is_a_config_error() {
        for text in ["nonsense", "seed=abc", "colour=red"] {
            let err = RunConfig::default().apply_text(text).unwrap_err();
            assert!(matches!(err, CliError::Config(_)), "{text}");
        }
        let c = RunConfig {
            dt: -1.0,
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(CliError::Config(_))));
        assert!(RunConfig::default().validate().is_ok());
    }
}
