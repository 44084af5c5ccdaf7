//! One-input, two-output toy regression problems.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub const TOY_TRAIN_X: [f64; 5] = [1.0, 3.0, 5.0, 7.0, 9.0];
pub const TOY_TEST_X: [f64; 5] = [2.0, 4.0, 6.0, 8.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyRelationship {
    /// `y₁ = −x/3 + 2`, `y₂ = 2x − 1`.
    Linear,
    /// `y₁ = 1/(1 + exp(log₁₀ x^{−3/2}))`, `y₂ = 1/(1 + exp(x^{−1/4}))`.
    NonLinear,
}

impl ToyRelationship {
    pub fn eval(self, x: f64) -> [f64; 2] {
        match self {
            ToyRelationship::Linear => [-x / 3.0 + 2.0, 2.0 * x - 1.0],
            ToyRelationship::NonLinear => [
                1.0 / (1.0 + x.powf(-1.5).log10().exp()),
                1.0 / (1.0 + x.powf(-0.25).exp()),
            ],
        }
    }
}

impl fmt::Display for ToyRelationship {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ToyRelationship::Linear => "linear",
            ToyRelationship::NonLinear => "nonlinear",
        })
    }
}

impl FromStr for ToyRelationship {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "toy-linear" => Ok(ToyRelationship::Linear),
            "nonlinear" | "non-linear" | "toy-nonlinear" => Ok(ToyRelationship::NonLinear),
            _ => Err(Error::InvalidConfig(format!("unknown toy relationship '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToySpec {
    pub relationship: ToyRelationship,
    /// Standard deviation of the noise added to training targets.
    pub sigma: f64,
    pub seed: u64,
}

/// Inputs carry a constant-1 second column.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyData<T> {
    pub train_inputs: Matrix<T>,
    pub train_targets: Matrix<T>,
    pub test_inputs: Matrix<T>,
    pub test_targets: Matrix<T>,
}

/// Standard normal draws behind the training noise; the noise is `σ·z`, so
/// one seed gives the same pattern at every `σ`.
pub fn toy_noise(seed: u64) -> [f64; 10] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::array::from_fn(|_| StandardNormal.sample(&mut rng))
}

pub fn gen_toy<T: Scalar>(spec: &ToySpec) -> Result<ToyData<T>> {
    if !(spec.sigma.is_finite() && spec.sigma >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "noise sigma must be >= 0, got {}",
            spec.sigma
        )));
    }
    let inputs = |xs: &[f64]| Matrix::from_fn(xs.len(), 2, |i, j| T::lit(if j == 0 { xs[i] } else { 1.0 }));
    let targets = |xs: &[f64], noise: Option<&[f64; 10]>| {
        Matrix::from_fn(xs.len(), 2, |i, j| {
            let clean = spec.relationship.eval(xs[i])[j];
            T::lit(clean + noise.map_or(0.0, |z| spec.sigma * z[2 * i + j]))
        })
    };
    let z = toy_noise(spec.seed);
    Ok(ToyData {
        train_inputs: inputs(&TOY_TRAIN_X),
        train_targets: targets(&TOY_TRAIN_X, (spec.sigma > 0.0).then_some(&z)),
        test_inputs: inputs(&TOY_TEST_X),
        test_targets: targets(&TOY_TEST_X, None),
    })
}
