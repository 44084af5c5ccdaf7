//! Validated experiment settings, independent of how they were supplied.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, ensure, Result};
use bpls_core::baselines::{OptimizerConfig, OptimizerKind};
use bpls_core::bpls::BplsConfig;
use bpls_core::data::ToyRelationship;
use bpls_core::network::{Activation, ActivationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bpls,
    Gd(OptimizerKind),
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Bpls,
        Method::Gd(OptimizerKind::Sgd),
        Method::Gd(OptimizerKind::Momentum),
        Method::Gd(OptimizerKind::Nag),
        Method::Gd(OptimizerKind::AdaGrad),
        Method::Gd(OptimizerKind::Adam),
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Bpls => f.write_str("bpls"),
            Method::Gd(k) => k.fmt(f),
        }
    }
}

impl FromStr for Method {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("bpls") {
            return Ok(Method::Bpls);
        }
        Ok(Method::Gd(s.parse::<OptimizerKind>()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageDataset {
    Mnist,
    FashionMnist,
}

impl ImageDataset {
    /// Sub-directory of the data directory holding the IDX files.
    pub fn dir_name(self) -> &'static str {
        match self {
            ImageDataset::Mnist => "mnist",
            ImageDataset::FashionMnist => "fashion-mnist",
        }
    }
}

impl fmt::Display for ImageDataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dir_name())
    }
}

impl FromStr for ImageDataset {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mnist" => Ok(ImageDataset::Mnist),
            "fashion-mnist" | "fashion" | "fashion_mnist" => Ok(ImageDataset::FashionMnist),
            _ => bail!("unknown dataset '{s}' (expected mnist or fashion-mnist)"),
        }
    }
}

/// Settings shared by every experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    /// First seed; Monte Carlo run `m` uses `seed + m`.
    pub seed: u64,
    pub monte_carlo: usize,
    pub methods: Vec<Method>,
    pub workers: usize,
    /// Fill the `wall_time_s` column. Off by default so reruns are
    /// byte-identical.
    pub timings: bool,
    pub bpls: BplsConfig,
    pub clamp_delta: f64,
    pub epochs_max: usize,
    pub batch_size: usize,
    /// Overrides every optimizer's default step size.
    pub learning_rate: Option<f64>,
}

impl RunSettings {
    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.monte_carlo as u64).map(move |m| self.seed + m)
    }

    pub fn bpls_config(&self, seed: u64) -> BplsConfig {
        BplsConfig {
            seed,
            workers: self.workers,
            ..self.bpls.clone()
        }
    }

    /// `default_rate` picks the step size when no override is set.
    pub fn optimizer(
        &self,
        kind: OptimizerKind,
        seed: u64,
        default_rate: impl Fn(OptimizerKind) -> f64,
    ) -> OptimizerConfig {
        OptimizerConfig {
            learning_rate: self.learning_rate.unwrap_or_else(|| default_rate(kind)),
            epochs_max: self.epochs_max,
            batch_size: self.batch_size,
            seed,
            ..OptimizerConfig::new(kind)
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.monte_carlo > 0, "the Monte Carlo count must be at least 1");
        ensure!(!self.methods.is_empty(), "at least one method is needed");
        ensure!(self.workers > 0, "workers must be at least 1");
        ensure!(self.batch_size > 0, "batch size must be at least 1");
        if let Some(lr) = self.learning_rate {
            ensure!(lr.is_finite() && lr > 0.0, "learning rate must be positive");
        }
        Activation::sigmoid().with_clamp(self.clamp_delta).validate()?;
        self.bpls.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyConfig {
    pub relationship: ToyRelationship,
    pub sigmas: Vec<f64>,
    pub hidden: usize,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub run: RunSettings,
}

impl ToyConfig {
    /// Identity activations for the linear toy, sigmoids for the nonlinear
    /// one.
    pub fn default_activation(relationship: ToyRelationship) -> Activation {
        match relationship {
            ToyRelationship::Linear => Activation::identity(),
            ToyRelationship::NonLinear => Activation::sigmoid(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.run.validate()?;
        ensure!(!self.sigmas.is_empty(), "the sigma grid is empty");
        ensure!(
            self.sigmas.iter().all(|s| s.is_finite() && *s >= 0.0),
            "sigma values must be finite and >= 0"
        );
        ensure!(self.hidden > 0, "the hidden layer needs at least one neuron");
        ensure!(
            !self.output_activation.is_rowwise(),
            "toy outputs are independent regressions; softmax does not apply"
        );
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageConfig {
    pub dataset: ImageDataset,
    pub data_dir: PathBuf,
    pub hidden: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub bias: bool,
    pub smoothing: f64,
    pub train_limit: Option<usize>,
    pub test_limit: Option<usize>,
    pub run: RunSettings,
}

impl ImageConfig {
    pub fn dataset_dir(&self) -> PathBuf {
        self.data_dir.join(self.dataset.dir_name())
    }

    pub fn validate(&self) -> Result<()> {
        self.run.validate()?;
        ensure!(
            !self.hidden.is_empty() && self.hidden.iter().all(|&h| h > 0),
            "hidden layer widths must be positive"
        );
        ensure!((0.0..1.0).contains(&self.smoothing), "smoothing must lie in [0, 1)");
        if self.run.methods.iter().any(|m| matches!(m, Method::Gd(_))) {
            ensure!(
                matches!(
                    self.output_activation.kind,
                    ActivationKind::Softmax | ActivationKind::Sigmoid
                ),
                "cross-entropy baselines need a softmax or sigmoid output, got {}",
                self.output_activation
            );
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub image: ImageConfig,
    /// Worker count compared against a single worker.
    pub compare_workers: usize,
}
