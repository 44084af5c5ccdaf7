use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Training loss of the gradient baselines, averaged over the batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `Σ_j (y_j − t_j)²` per sample.
    MeanSquaredError,
    /// `−Σ_j t_j ln y_j` per sample; outputs must be probabilities.
    CrossEntropy,
}

impl LossKind {
    pub fn value<T: Scalar>(&self, outputs: &Matrix<T>, targets: &Matrix<T>) -> Result<f64> {
        outputs.same_shape("loss", targets)?;
        if outputs.rows() == 0 {
            return Err(Error::Empty("loss over an empty batch"));
        }
        let total: f64 = outputs
            .as_slice()
            .iter()
            .zip(targets.as_slice())
            .map(|(&y, &t)| {
                let (y, t) = (y.as_f64(), t.as_f64());
                match self {
                    LossKind::MeanSquaredError => (y - t) * (y - t),
                    LossKind::CrossEntropy => {
                        if t == 0.0 {
                            0.0
                        } else {
                            -t * y.max(f64::MIN_POSITIVE).ln()
                        }
                    }
                }
            })
            .sum();
        Ok(total / outputs.rows() as f64)
    }

    /// `∂L/∂y` for the batch-mean loss.
    pub fn output_gradient<T: Scalar>(&self, outputs: &Matrix<T>, targets: &Matrix<T>) -> Result<Matrix<T>> {
        let scale = T::lit(1.0 / outputs.rows().max(1) as f64);
        let two = T::lit(2.0);
        let tiny = T::min_positive_value();
        outputs.zip_map(targets, |y, t| match self {
            LossKind::MeanSquaredError => two * (y - t) * scale,
            LossKind::CrossEntropy => -t / y.max(tiny) * scale,
        })
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::MeanSquaredError => "mse",
            LossKind::CrossEntropy => "cross-entropy",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mse" | "mean-squared-error" => Ok(LossKind::MeanSquaredError),
            "ce" | "cross-entropy" | "crossentropy" => Ok(LossKind::CrossEntropy),
            _ => Err(Error::InvalidConfig(format!("unknown loss '{s}'"))),
        }
    }
}
