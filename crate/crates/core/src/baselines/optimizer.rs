use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerKind {
    Sgd,
    Momentum,
    Nag,
    AdaGrad,
    Adam,
}

impl OptimizerKind {
    pub const ALL: [OptimizerKind; 5] = [
        OptimizerKind::Sgd,
        OptimizerKind::Momentum,
        OptimizerKind::Nag,
        OptimizerKind::AdaGrad,
        OptimizerKind::Adam,
    ];

    /// Step size used when none is given.
    pub fn default_learning_rate(self) -> f64 {
        match self {
            OptimizerKind::AdaGrad => 0.1,
            _ => 1e-3,
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::Momentum => "momentum",
            OptimizerKind::Nag => "nag",
            OptimizerKind::AdaGrad => "adagrad",
            OptimizerKind::Adam => "adam",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Ok(OptimizerKind::Sgd),
            "momentum" => Ok(OptimizerKind::Momentum),
            "nag" | "nesterov" => Ok(OptimizerKind::Nag),
            "adagrad" => Ok(OptimizerKind::AdaGrad),
            "adam" => Ok(OptimizerKind::Adam),
            _ => Err(Error::InvalidConfig(format!("unknown optimizer '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub kind: OptimizerKind,
    pub learning_rate: f64,
    /// Velocity decay for momentum and NAG.
    pub momentum: f64,
    pub beta1: f64,
    pub beta2: f64,
    /// Denominator guard for AdaGrad and Adam.
    pub epsilon: f64,
    pub epochs_max: usize,
    pub batch_size: usize,
    /// Seeds the per-epoch shuffles.
    pub seed: u64,
    /// Evaluate the full training loss after every epoch.
    pub record_loss: bool,
}

impl OptimizerConfig {
    pub fn new(kind: OptimizerKind) -> Self {
        Self {
            kind,
            learning_rate: kind.default_learning_rate(),
            momentum: 0.9,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            epochs_max: 1000,
            batch_size: 1,
            seed: 0,
            record_loss: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        for (name, b) in [
            ("momentum", self.momentum),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
        ] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidConfig(format!("{name} must lie in [0, 1)")));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad("optimizer epsilon must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        Ok(())
    }
}

/// Per-parameter history kept between steps.
#[derive(Debug, Clone)]
pub struct OptimizerState<T> {
    pub steps: u64,
    /// Velocity (momentum, NAG), squared-gradient sum (AdaGrad) or first
    /// moment (Adam).
    pub first: Vec<Matrix<T>>,
    /// Second moment (Adam only).
    pub second: Vec<Matrix<T>>,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(weights: &[Matrix<T>]) -> Self {
        let zeros = || weights.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect();
        Self {
            steps: 0,
            first: zeros(),
            second: zeros(),
        }
    }

    /// Point at which NAG evaluates the gradient, `w + β·v`.
    pub fn lookahead(&self, weights: &[Matrix<T>], cfg: &OptimizerConfig) -> Vec<Matrix<T>> {
        let beta = T::lit(cfg.momentum);
        weights
            .iter()
            .zip(&self.first)
            .map(|(w, v)| {
                let mut out = w.clone();
                for (o, &vv) in out.as_mut_slice().iter_mut().zip(v.as_slice()) {
                    *o += beta * vv;
                }
                out
            })
            .collect()
    }
}

/// Apply one update in place. For NAG `grads` must have been taken at
/// [`OptimizerState::lookahead`].
pub fn optimizer_step<T: Scalar>(
    weights: &mut [Matrix<T>],
    state: &mut OptimizerState<T>,
    grads: &[Matrix<T>],
    cfg: &OptimizerConfig,
) -> Result<()> {
    if grads.len() != weights.len() || state.first.len() != weights.len() {
        return Err(Error::LengthMismatch {
            what: "gradient layers",
            expected: weights.len(),
            actual: grads.len(),
        });
    }
    for (w, g) in weights.iter().zip(grads) {
        w.same_shape("optimizer step", g)?;
    }
    state.steps += 1;
    let eta = T::lit(cfg.learning_rate);
    let eps = T::lit(cfg.epsilon);
    let one = T::one();

    for (l, (w, g)) in weights.iter_mut().zip(grads).enumerate() {
        let w = w.as_mut_slice();
        let g = g.as_slice();
        let first = state.first[l].as_mut_slice();
        match cfg.kind {
            OptimizerKind::Sgd => {
                for (w, &g) in w.iter_mut().zip(g) {
                    *w -= eta * g;
                }
            }
            OptimizerKind::Momentum | OptimizerKind::Nag => {
                let beta = T::lit(cfg.momentum);
                for ((w, &g), v) in w.iter_mut().zip(g).zip(first.iter_mut()) {
                    *v = beta * *v - eta * g;
                    *w += *v;
                }
            }
            OptimizerKind::AdaGrad => {
                for ((w, &g), acc) in w.iter_mut().zip(g).zip(first.iter_mut()) {
                    *acc += g * g;
                    *w -= eta * g / (acc.sqrt() + eps);
                }
            }
            OptimizerKind::Adam => {
                let (b1, b2) = (T::lit(cfg.beta1), T::lit(cfg.beta2));
                let t = state.steps as i32;
                let c1 = one - T::lit(cfg.beta1.powi(t));
                let c2 = one - T::lit(cfg.beta2.powi(t));
                let second = state.second[l].as_mut_slice();
                for (((w, &g), m), v) in w.iter_mut().zip(g).zip(first.iter_mut()).zip(second.iter_mut()) {
                    *m = b1 * *m + (one - b1) * g;
                    *v = b2 * *v + (one - b2) * g * g;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *w -= eta * m_hat / (v_hat.sqrt() + eps);
                }
            }
        }
    }
    Ok(())
}
