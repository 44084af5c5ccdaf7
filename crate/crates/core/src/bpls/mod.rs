//! Back-propagating least squares: closed-form, layer-by-layer weight
//! optimization from the output layer towards the input.

mod config;
mod layer;
mod report;
mod trainer;

pub use config::BplsConfig;
pub use layer::{backprop_neuron_targets, blend_weights, solve_layer_weights, TargetPlan};
pub use report::{PhaseTime, TrainReport};
pub use trainer::{
    bpls_pass, miss_indices, train_injective, train_injective_from, train_noninjective, train_noninjective_from,
    Iterate, PassOutcome,
};
