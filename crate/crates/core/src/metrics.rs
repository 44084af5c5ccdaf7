//! Root mean squared error over Monte Carlo runs and classification accuracy.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// One evaluation: network estimates against desired values, with class
/// labels when the task is classification.
#[derive(Debug, Clone)]
pub struct MetricSample<T> {
    pub predicted: Matrix<T>,
    pub desired: Matrix<T>,
    pub labels: Option<Vec<usize>>,
}

impl<T: Scalar> MetricSample<T> {
    pub fn new(predicted: Matrix<T>, desired: Matrix<T>) -> Result<Self> {
        predicted.same_shape("metric sample", &desired)?;
        Ok(Self {
            predicted,
            desired,
            labels: None,
        })
    }

    pub fn squared_error(&self) -> f64 {
        squared_error(&self.predicted, &self.desired)
    }
}

fn squared_error<T: Scalar>(predicted: &Matrix<T>, desired: &Matrix<T>) -> f64 {
    predicted
        .as_slice()
        .iter()
        .zip(desired.as_slice())
        .map(|(&p, &d)| {
            let e = p.as_f64() - d.as_f64();
            e * e
        })
        .sum()
}

/// `sqrt((1/M_c) Σ_m ‖ỹ_m − ŷ_m‖²)`, the squared norm of run `m` taken over
/// every entry of its output matrix.
pub fn rmse<T: Scalar>(runs: &[(&Matrix<T>, &Matrix<T>)]) -> Result<f64> {
    if runs.is_empty() {
        return Err(Error::Empty("rmse needs at least one run"));
    }
    let mut total = 0.0;
    for (p, d) in runs {
        p.same_shape("rmse", d)?;
        total += squared_error(p, d);
    }
    Ok((total / runs.len() as f64).sqrt())
}

/// RMSE from per-run squared errors that were already accumulated.
pub fn rmse_from_squared_errors(squared: &[f64]) -> Result<f64> {
    if squared.is_empty() {
        return Err(Error::Empty("rmse needs at least one run"));
    }
    Ok((squared.iter().sum::<f64>() / squared.len() as f64).sqrt())
}

/// Index of each row's maximum; ties go to the lowest index.
pub fn argmax_rows<T: Scalar>(outputs: &Matrix<T>) -> Vec<usize> {
    outputs
        .row_iter()
        .map(|row| {
            let mut best = 0;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

/// Fraction of rows whose argmax equals the label.
pub fn classification_accuracy<T: Scalar>(outputs: &Matrix<T>, labels: &[usize]) -> Result<f64> {
    if labels.len() != outputs.rows() {
        return Err(Error::LengthMismatch {
            what: "labels",
            expected: outputs.rows(),
            actual: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::Empty("accuracy needs at least one sample"));
    }
    let hits = argmax_rows(outputs).iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / labels.len() as f64)
}
