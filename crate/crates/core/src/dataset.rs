//! Supervised samples `(u, w) → (f1, f2)` labelled by the aerodynamic oracle.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::aero::{specific_body_forces, AeroParams, CoefficientTable};
use crate::fmt::real;

/// Sample count used for the default training set.
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.9;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("sample count must be > 0")]
    Empty,
    #[error("invalid ranges: {0}")]
    InvalidRanges(String),
    #[error("split fraction {fraction} of {n} samples leaves an empty part")]
    BadSplit { fraction: f64, n: usize },
    #[error("dataset csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which force a network estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    F1,
    F2,
}

impl Target {
    pub const BOTH: [Target; 2] = [Target::F1, Target::F2];

    pub fn name(self) -> &'static str {
        match self {
            Target::F1 => "f1",
            Target::F2 => "f2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub u: f64,
    pub w: f64,
    pub f1: f64,
    pub f2: f64,
}

impl Sample {
    pub fn input(&self) -> [f64; 2] {
        [self.u, self.w]
    }

    pub fn target(&self, which: Target) -> f64 {
        match which {
            Target::F1 => self.f1,
            Target::F2 => self.f2,
        }
    }
}

/// Sampling rectangle for the body velocities, m/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ranges {
    pub u_min: f64,
    pub u_max: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl Default for Ranges {
    /// Hover-to-cruise envelope: `u ∈ [0, 18]`, `w ∈ [-1, 4]`.
    fn default() -> Self {
        Self {
            u_min: 0.0,
            u_max: 18.0,
            w_min: -1.0,
            w_max: 4.0,
        }
    }
}

impl Ranges {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let all = [self.u_min, self.u_max, self.w_min, self.w_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(DatasetError::InvalidRanges("non-finite bound".into()));
        }
        if self.u_min > self.u_max || self.w_min > self.w_max {
            return Err(DatasetError::InvalidRanges(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn contains(&self, u: f64, w: f64) -> bool {
        (self.u_min..=self.u_max).contains(&u) && (self.w_min..=self.w_max).contains(&w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub seed: u64,
    pub ranges: Ranges,
}

/// Labels a velocity pair with the oracle at zero pitch rate.
pub fn label(u: f64, w: f64, params: &AeroParams, table: &CoefficientTable) -> Sample {
    let f = specific_body_forces(u, w, 0.0, params, table);
    Sample {
        u,
        w,
        f1: f.f1,
        f2: f.f2,
    }
}

/// `n` samples drawn uniformly over `ranges`, labelled with `q = 0`.
pub fn generate_dataset(
    n: usize,
    seed: u64,
    ranges: Ranges,
    params: &AeroParams,
    table: &CoefficientTable,
) -> Result<Dataset, DatasetError> {
    if n == 0 {
        return Err(DatasetError::Empty);
    }
    ranges.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n)
        .map(|_| {
            let u = rng.gen_range(ranges.u_min..=ranges.u_max);
            let w = rng.gen_range(ranges.w_min..=ranges.w_max);
            label(u, w, params, table)
        })
        .collect();
    Ok(Dataset {
        samples,
        seed,
        ranges,
    })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn targets(&self, which: Target) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(move |s| s.target(which))
    }

    /// Shuffled disjoint partition into `(train, test)`.
    pub fn split(
        &self,
        train_fraction: f64,
        seed: u64,
    ) -> Result<(Dataset, Dataset), DatasetError> {
        let n = self.len();
        let n_train = (train_fraction * n as f64).round();
        if !(train_fraction > 0.0 && train_fraction < 1.0) || n_train < 1.0 || n_train >= n as f64 {
            return Err(DatasetError::BadSplit {
                fraction: train_fraction,
                n,
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let part = |idx: &[usize]| Dataset {
            samples: idx.iter().map(|&i| self.samples[i]).collect(),
            seed: self.seed,
            ranges: self.ranges,
        };
        let (a, b) = order.split_at(n_train as usize);
        Ok((part(a), part(b)))
    }

    pub fn to_csv_string(&self) -> String {
        let r = &self.ranges;
        let mut out = format!(
            "# ranges {} {} {} {} {} {}\nu,w,f1,f2\n",
            real(r.u_min),
            real(r.u_max),
            real(r.w_min),
            real(r.w_max),
            self.seed,
            self.len()
        );
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{}\n",
                real(s.u),
                real(s.w),
                real(s.f1),
                real(s.f2)
            ));
        }
        out
    }

    pub fn from_csv_str(text: &str) -> Result<Self, DatasetError> {
        let err = |line: usize, msg: String| DatasetError::Csv { line, msg };
        let mut lines = text.lines().enumerate();

        let (_, sidecar) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let fields: Vec<&str> = sidecar.split_whitespace().collect();
        if fields.len() != 8 || fields[0] != "#" || fields[1] != "ranges" {
            return Err(err(
                1,
                "expected `# ranges u_min u_max w_min w_max seed N`".into(),
            ));
        }
        let bound = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(1, format!("bad bound `{s}`")))
        };
        let ranges = Ranges {
            u_min: bound(fields[2])?,
            u_max: bound(fields[3])?,
            w_min: bound(fields[4])?,
            w_max: bound(fields[5])?,
        };
        ranges.validate()?;
        let seed: u64 = fields[6].parse().map_err(|_| err(1, "bad seed".into()))?;
        let declared: usize = fields[7].parse().map_err(|_| err(1, "bad count".into()))?;

        match lines.next() {
            Some((_, "u,w,f1,f2")) => {}
            Some((i, h)) => {
                return Err(err(
                    i + 1,
                    format!("expected header `u,w,f1,f2`, got `{h}`"),
                ))
            }
            None => return Err(err(2, "missing header".into())),
        }

        let mut samples = Vec::with_capacity(declared);
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|f| {
                    f.trim()
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| err(i + 1, format!("bad value `{f}`")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if vals.len() != 4 {
                return Err(err(i + 1, format!("expected 4 fields, got {}", vals.len())));
            }
            if !ranges.contains(vals[0], vals[1]) {
                return Err(err(
                    i + 1,
                    format!("sample ({}, {}) outside declared ranges", vals[0], vals[1]),
                ));
            }
            samples.push(Sample {
                u: vals[0],
                w: vals[1],
                f1: vals[2],
                f2: vals[3],
            });
        }
        if samples.len() != declared {
            return Err(err(
                1,
                format!("declared {declared} samples, found {}", samples.len()),
            ));
        }
        Ok(Self {
            samples,
            seed,
            ranges,
        })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        Self::from_csv_str(&fs::read_to_string(path)?)
    }
}
