//! Closed-form back-propagating least-squares training for fully-connected
//! networks, with gradient-descent baselines to compare against.
//!
//! Every numeric routine is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common choices.

pub mod baselines;
pub mod bpls;
pub mod data;
mod error;
pub mod linalg;
pub mod metrics;
pub mod network;
mod scalar;

pub use error::{Error, IdxError, Result};
pub use scalar::Scalar;

pub use linalg::Matrix;
pub use network::{Activation, Network, NetworkSpec};

pub type Matrix64 = linalg::Matrix<f64>;
pub type Matrix32 = linalg::Matrix<f32>;
pub type Network64 = network::Network<f64>;
pub type Network32 = network::Network<f32>;
pub type Dataset64 = data::LabeledDataset<f64>;
pub type Dataset32 = data::LabeledDataset<f32>;
