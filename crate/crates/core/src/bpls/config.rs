use crate::error::{Error, Result};
use crate::linalg::{RidgeConfig, DEFAULT_RIDGE_EPSILON};

/// Settings shared by the injective and the classification trainers.
#[derive(Debug, Clone, PartialEq)]
pub struct BplsConfig {
    /// Ridge strength of every layer solve.
    pub epsilon: f64,
    /// Smallest magnitude a weight may have when it divides a residual in
    /// the hidden-target update; smaller weights are pushed out to this
    /// magnitude, keeping their sign (zero counts as positive).
    pub weight_floor: f64,
    /// Upper bound on miss-set refinement iterations.
    pub tau_max: usize,
    pub seed: u64,
    pub init_low: f64,
    pub init_high: f64,
    /// Threads used inside each layer solve. Results do not depend on it.
    pub workers: usize,
}

impl Default for BplsConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_RIDGE_EPSILON,
            weight_floor: 1e-3,
            tau_max: 20,
            seed: 0,
            init_low: -1.0,
            init_high: 1.0,
            workers: 1,
        }
    }
}

impl BplsConfig {
    pub fn validate(&self) -> Result<()> {
        self.ridge().validate()?;
        if !(self.weight_floor > 0.0 && self.weight_floor.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "weight_floor must be > 0, got {}",
                self.weight_floor
            )));
        }
        if self.tau_max < 1 {
            return Err(Error::InvalidConfig("tau_max must be >= 1".into()));
        }
        if !(self.init_low < self.init_high) {
            return Err(Error::InvalidConfig(format!(
                "init range needs low < high, got [{}, {}]",
                self.init_low, self.init_high
            )));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be >= 1".into()));
        }
        Ok(())
    }

    pub fn ridge(&self) -> RidgeConfig {
        RidgeConfig { epsilon: self.epsilon }
    }
}
