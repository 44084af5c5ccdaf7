//! IDX image datasets, toy regression problems and target encoding.

mod dataset;
mod idx;
mod toy;

pub use dataset::{encode_targets, idx_paths, load_mnist_dir, LabeledDataset, Split, DEFAULT_SMOOTHING};
pub use idx::{load_idx, parse_idx, write_idx, IdxArray};
pub use toy::{gen_toy, toy_noise, ToyData, ToyRelationship, ToySpec, TOY_TEST_X, TOY_TRAIN_X};
