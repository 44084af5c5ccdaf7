//! Activation functions, their derivatives and their (clamped) inverses.
//!
//! Inversion is what turns a desired neuron value into a desired summed
//! input. Values outside the open range of a saturating activation (one-hot
//! targets, noisy regression targets) are first clamped `clamp_delta` inside
//! the range, so inversion never fails.
//!
//! Softmax is only invertible up to a constant shift of its inputs. Its
//! inverse returns the zero-mean log vector, whose softmax is the (clamped,
//! renormalized) input row.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub const DEFAULT_CLAMP_DELTA: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActivationKind {
    Identity,
    Sigmoid,
    Tanh,
    Softplus,
    Elu { alpha: f64 },
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Activation {
    pub kind: ActivationKind,
    pub clamp_delta: f64,
}

impl From<ActivationKind> for Activation {
    fn from(kind: ActivationKind) -> Self {
        Self {
            kind,
            clamp_delta: DEFAULT_CLAMP_DELTA,
        }
    }
}

impl Activation {
    pub fn new(kind: ActivationKind, clamp_delta: f64) -> Result<Self> {
        let a = Self { kind, clamp_delta };
        a.validate()?;
        Ok(a)
    }

    pub fn identity() -> Self {
        ActivationKind::Identity.into()
    }

    pub fn sigmoid() -> Self {
        ActivationKind::Sigmoid.into()
    }

    pub fn tanh() -> Self {
        ActivationKind::Tanh.into()
    }

    pub fn softplus() -> Self {
        ActivationKind::Softplus.into()
    }

    pub fn elu(alpha: f64) -> Self {
        ActivationKind::Elu { alpha }.into()
    }

    pub fn softmax() -> Self {
        ActivationKind::Softmax.into()
    }

    pub fn with_clamp(mut self, delta: f64) -> Self {
        self.clamp_delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clamp_delta > 0.0 && self.clamp_delta < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "clamp_delta must lie in (0, 0.5), got {}",
                self.clamp_delta
            )));
        }
        if let ActivationKind::Elu { alpha } = self.kind {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidConfig(format!("ELU alpha must be > 0, got {alpha}")));
            }
        }
        Ok(())
    }

    pub fn is_rowwise(&self) -> bool {
        matches!(self.kind, ActivationKind::Softmax)
    }

    /// Applies the activation to a batch of summed inputs.
    pub fn apply<T: Scalar>(&self, z: &Matrix<T>) -> Matrix<T> {
        match self.kind {
            ActivationKind::Softmax => {
                let mut out = z.clone();
                for i in 0..out.rows() {
                    softmax_row(out.row_mut(i));
                }
                out
            }
            _ => z.map(|x| self.apply_scalar(x)),
        }
    }

    /// Elementwise form; not meaningful for softmax.
    pub fn apply_scalar<T: Scalar>(&self, x: T) -> T {
        let one = T::one();
        match self.kind {
            ActivationKind::Identity | ActivationKind::Softmax => x,
            ActivationKind::Sigmoid => sigmoid(x),
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::Softplus => {
                // log(1 + e^x) without overflow
                x.max(T::zero()) + (-x.abs()).exp().ln_1p()
            }
            ActivationKind::Elu { alpha } => {
                if x >= T::zero() {
                    x
                } else {
                    T::lit(alpha) * (x.exp() - one)
                }
            }
        }
    }

    /// Maps desired activation values back to summed inputs, clamping into
    /// the invertible range first.
    pub fn invert<T: Scalar>(&self, v: &Matrix<T>) -> Matrix<T> {
        let delta = T::lit(self.clamp_delta);
        let one = T::one();
        match self.kind {
            ActivationKind::Identity => v.clone(),
            ActivationKind::Sigmoid => v.map(|y| {
                let y = y.max(delta).min(one - delta);
                (y / (one - y)).ln()
            }),
            ActivationKind::Tanh => v.map(|y| {
                let y = y.max(delta - one).min(one - delta);
                y.atanh()
            }),
            ActivationKind::Softplus => v.map(|y| {
                let y = y.max(delta);
                // log(e^y - 1)
                if y > T::lit(30.0) {
                    y + (-(-y).exp()).ln_1p()
                } else {
                    y.exp_m1().ln()
                }
            }),
            ActivationKind::Elu { alpha } => {
                let alpha = T::lit(alpha);
                let floor = -alpha + delta * alpha;
                v.map(|y| {
                    if y >= T::zero() {
                        y
                    } else {
                        (y.max(floor) / alpha).ln_1p()
                    }
                })
            }
            ActivationKind::Softmax => {
                let mut out = v.clone();
                for i in 0..out.rows() {
                    softmax_inverse_row(out.row_mut(i), delta);
                }
                out
            }
        }
    }

    /// Back-propagates `grad_out = ∂L/∂a` to `∂L/∂z`, given the summed inputs
    /// `z` and the activations `a = f(z)`.
    pub fn backward<T: Scalar>(&self, z: &Matrix<T>, a: &Matrix<T>, grad_out: &Matrix<T>) -> Matrix<T> {
        let one = T::one();
        match self.kind {
            ActivationKind::Softmax => {
                let mut out = grad_out.clone();
                for i in 0..out.rows() {
                    let ar = a.row(i);
                    let dot: T = ar.iter().zip(grad_out.row(i)).map(|(&p, &g)| p * g).sum();
                    for (o, &p) in out.row_mut(i).iter_mut().zip(ar) {
                        *o = p * (*o - dot);
                    }
                }
                out
            }
            ActivationKind::Identity => grad_out.clone(),
            ActivationKind::Sigmoid => Matrix::from_fn(a.rows(), a.cols(), |i, j| {
                let s = a[(i, j)];
                grad_out[(i, j)] * s * (one - s)
            }),
            ActivationKind::Tanh => Matrix::from_fn(a.rows(), a.cols(), |i, j| {
                let t = a[(i, j)];
                grad_out[(i, j)] * (one - t * t)
            }),
            ActivationKind::Softplus => {
                Matrix::from_fn(a.rows(), a.cols(), |i, j| grad_out[(i, j)] * sigmoid(z[(i, j)]))
            }
            ActivationKind::Elu { alpha } => Matrix::from_fn(a.rows(), a.cols(), |i, j| {
                let d = if z[(i, j)] >= T::zero() {
                    one
                } else {
                    a[(i, j)] + T::lit(alpha)
                };
                grad_out[(i, j)] * d
            }),
        }
    }
}

#[inline]
fn sigmoid<T: Scalar>(x: T) -> T {
    let one = T::one();
    if x >= T::zero() {
        one / (one + (-x).exp())
    } else {
        let e = x.exp();
        e / (one + e)
    }
}

pub(crate) fn softmax_row<T: Scalar>(row: &mut [T]) {
    let max = row.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
    let mut sum = T::zero();
    for x in row.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in row.iter_mut() {
        *x /= sum;
    }
}

fn softmax_inverse_row<T: Scalar>(row: &mut [T], delta: T) {
    let mut sum = T::zero();
    for x in row.iter_mut() {
        *x = x.max(delta);
        sum += *x;
    }
    let mut mean = T::zero();
    for x in row.iter_mut() {
        *x = (*x / sum).ln();
        mean += *x;
    }
    mean /= T::lit(row.len() as f64);
    for x in row.iter_mut() {
        *x -= mean;
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ActivationKind::Identity => write!(f, "identity"),
            ActivationKind::Sigmoid => write!(f, "sigmoid"),
            ActivationKind::Tanh => write!(f, "tanh"),
            ActivationKind::Softplus => write!(f, "softplus"),
            ActivationKind::Elu { alpha } => write!(f, "elu({alpha})"),
            ActivationKind::Softmax => write!(f, "softmax"),
        }?;
        if self.clamp_delta != DEFAULT_CLAMP_DELTA {
            write!(f, "@{}", self.clamp_delta)?;
        }
        Ok(())
    }
}

impl FromStr for Activation {
    type Err = Error;

    /// Parses `name`, `elu(alpha)`, optionally followed by `@clamp_delta`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, delta) = match s.split_once('@') {
            Some((n, d)) => (
                n,
                d.parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("bad clamp delta in '{s}'")))?,
            ),
            None => (s, DEFAULT_CLAMP_DELTA),
        };
        let name = name.trim().to_ascii_lowercase();
        let kind = match name.as_str() {
            "identity" | "linear" => ActivationKind::Identity,
            "sigmoid" => ActivationKind::Sigmoid,
            "tanh" => ActivationKind::Tanh,
            "softplus" => ActivationKind::Softplus,
            "softmax" => ActivationKind::Softmax,
            "elu" => ActivationKind::Elu { alpha: 1.0 },
            other => {
                let alpha = other
                    .strip_prefix("elu(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|a| a.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown activation '{s}'")))?;
                ActivationKind::Elu { alpha }
            }
        };
        Activation::new(kind, delta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> Matrix<f64> {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn closed_form_points() {
        let z = m(&[&[0.0]]);
        assert_eq!(Activation::sigmoid().apply(&z)[(0, 0)], 0.5);
        let sp = Activation::softplus().apply(&z)[(0, 0)];
        assert!((sp - std::f64::consts::LN_2).abs() < 1e-15);
        let p = Activation::softmax().apply(&m(&[&[0.0, 0.0]]));
        assert_eq!(p.as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn softmax_survives_large_inputs() {
        let p = Activation::softmax().apply(&m(&[&[1000.0, 1000.0, -1000.0]]));
        assert!(p.as_slice().iter().all(|x| x.is_finite()));
        assert!((p[(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn inverse_points() {
        assert_eq!(Activation::sigmoid().invert(&m(&[&[0.5]]))[(0, 0)], 0.0);
        let back = Activation::sigmoid().invert(&Activation::sigmoid().apply(&m(&[&[2.0]])));
        assert!((back[(0, 0)] - 2.0).abs() < 1e-12);
        let z = Activation::softmax().invert(&m(&[&[0.5, 0.5]]));
        assert_eq!(z.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn one_hot_targets_are_clamped() {
        let z = Activation::sigmoid().invert(&m(&[&[0.0, 1.0]]));
        let lim = ((1.0 - 1e-6) / 1e-6f64).ln();
        assert!((z[(0, 0)] + lim).abs() < 1e-6 && (z[(0, 1)] - lim).abs() < 1e-6);
        let s = Activation::softmax().invert(&m(&[&[1.0, 0.0, 0.0]]));
        assert!(s.as_slice().iter().all(|x| x.is_finite()));
        assert!(s.as_slice().iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn elu_below_range_is_clamped() {
        let a = Activation::elu(2.0);
        let z = a.invert(&m(&[&[-5.0, -1.0, 3.0]]));
        assert!(z[(0, 0)].is_finite());
        assert!((z[(0, 1)] - (0.5f64).ln()).abs() < 1e-15);
        assert_eq!(z[(0, 2)], 3.0);
    }

    #[test]
    fn names_round_trip() {
        for s in [
            "identity",
            "sigmoid",
            "tanh",
            "softplus",
            "softmax",
            "elu(0.5)",
            "sigmoid@0.01",
        ] {
            let a: Activation = s.parse().unwrap();
            assert_eq!(a.to_string(), s);
        }
        assert!("relu".parse::<Activation>().is_err());
        assert!("sigmoid@0.7".parse::<Activation>().is_err());
    }
}
