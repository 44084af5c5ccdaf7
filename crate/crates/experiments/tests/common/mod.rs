#![allow(dead_code)]

use std::fs::File;
use std::path::Path;

use bpls_core::baselines::OptimizerKind;
use bpls_core::bpls::BplsConfig;
use bpls_core::data::{write_idx, IdxArray, ToyRelationship};
use bpls_core::network::Activation;
use bpls_experiments::config::{ImageConfig, ImageDataset, Method, RunSettings, ToyConfig};

pub fn settings(mc: usize, methods: &[Method], epochs: usize) -> RunSettings {
    RunSettings {
        seed: 1,
        monte_carlo: mc,
        methods: methods.to_vec(),
        workers: 1,
        timings: false,
        bpls: BplsConfig::default(),
        clamp_delta: 1e-6,
        epochs_max: epochs,
        batch_size: 1,
        learning_rate: None,
    }
}

pub fn toy(relationship: ToyRelationship, sigmas: &[f64], methods: &[Method], mc: usize) -> ToyConfig {
    ToyConfig {
        relationship,
        sigmas: sigmas.to_vec(),
        hidden: 3,
        hidden_activation: ToyConfig::default_activation(relationship),
        output_activation: ToyConfig::default_activation(relationship),
        run: settings(mc, methods, 50),
    }
}

pub const SGD: Method = Method::Gd(OptimizerKind::Sgd);

/// Ten classes of 6x6 images; class `c` lights pixel row `c % 6` and column
/// `c / 6`, plus deterministic speckle.
fn write_split(dir: &Path, prefix: &str, count: usize, salt: u64) {
    let side = 6;
    let mut pixels = Vec::with_capacity(count * side * side);
    let mut labels = Vec::with_capacity(count);
    let mut state = 0x9e37_79b9_7f4a_7c15u64 ^ salt;
    for i in 0..count {
        let class = i % 10;
        labels.push(class as u8);
        for r in 0..side {
            for c in 0..side {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                let speckle = (state >> 58) as u8;
                let lit = r == class % side || c == class / side + 3;
                pixels.push(if lit { 180 + speckle } else { speckle });
            }
        }
    }
    let images = IdxArray {
        dims: vec![count, side, side],
        data: pixels,
    };
    let labels = IdxArray {
        dims: vec![count],
        data: labels,
    };
    write_idx(
        File::create(dir.join(format!("{prefix}-images-idx3-ubyte"))).unwrap(),
        &images,
    )
    .unwrap();
    write_idx(
        File::create(dir.join(format!("{prefix}-labels-idx1-ubyte"))).unwrap(),
        &labels,
    )
    .unwrap();
}

/// A data directory holding a small synthetic `mnist/` dataset.
pub fn synthetic_data_dir() -> tempfile::TempDir {
    let root = tempfile::tempdir().unwrap();
    let dir = root.path().join("mnist");
    std::fs::create_dir(&dir).unwrap();
    write_split(&dir, "train", 120, 1);
    write_split(&dir, "t10k", 40, 2);
    root
}

pub fn image(data_dir: &Path, methods: &[Method], epochs: usize) -> ImageConfig {
    ImageConfig {
        dataset: ImageDataset::Mnist,
        data_dir: data_dir.to_path_buf(),
        hidden: vec![8],
        hidden_activation: Activation::sigmoid(),
        output_activation: Activation::softmax(),
        bias: true,
        smoothing: 0.1,
        train_limit: None,
        test_limit: None,
        run: settings(1, methods, epochs),
    }
}
