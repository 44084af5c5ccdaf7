//! Gradient-descent baselines sharing the network forward pass.

mod gradients;
mod loss;
mod optimizer;
mod trainer;

pub use gradients::backprop_gradients;
pub use loss::LossKind;
pub use optimizer::{optimizer_step, OptimizerConfig, OptimizerKind, OptimizerState};
pub use trainer::{train_gd, train_gd_from, GdReport};
