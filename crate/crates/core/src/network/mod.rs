//! Fully-connected networks: architecture, weights, forward pass,
//! activations and the on-disk format.

mod activation;
mod io;
mod model;

pub use activation::{Activation, ActivationKind, DEFAULT_CLAMP_DELTA};
pub use io::NETWORK_FORMAT_HEADER;
pub use model::{init_weights, ForwardCache, Network, NetworkSpec};
