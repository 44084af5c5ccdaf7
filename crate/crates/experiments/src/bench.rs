//! Wall-clock comparison of BPLS against the gradient baselines.

use std::time::Instant;

use anyhow::Result;
use bpls_core::baselines::{train_gd_from, LossKind};
use bpls_core::bpls::{train_injective_from, train_noninjective_from, TrainReport};
use bpls_core::network::init_weights;
use bpls_core::{Matrix64, Network64};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{BenchConfig, Method};
use crate::image::{image_network, load_image_data, ImageData};

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub dataset: String,
    pub layer_widths: Vec<usize>,
    pub train_samples: usize,
    pub seeds: Vec<u64>,
    pub workers: usize,
    pub methods: Vec<MethodTiming>,
    pub bpls_breakdown: Option<BplsBreakdown>,
    pub worker_comparison: Option<WorkerComparison>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodTiming {
    pub method: String,
    pub mean_seconds: f64,
    pub run_seconds: Vec<f64>,
    /// Baselines only.
    pub epochs: Option<usize>,
    pub mean_seconds_per_epoch: Option<f64>,
}

/// Averages over seeds of where a BPLS run spends its time.
#[derive(Debug, Clone, Serialize)]
pub struct BplsBreakdown {
    pub mean_passes: f64,
    /// Weight layers, `L + 1`.
    pub layers: usize,
    /// Classification passes solve every layer once and refit each hidden
    /// layer, `2L + 1` solves per pass.
    pub mean_layer_solves: f64,
    pub solves_per_pass: f64,
    /// Solves of one plain pass without refits on the first seed, `L + 1`.
    pub injective_pass_solves: usize,
    pub forward_seconds: f64,
    /// Index `l − 1` holds layer `l`, summed over all passes.
    pub layer_seconds: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct WorkerComparison {
    pub workers: [usize; 2],
    pub seconds: [f64; 2],
    pub fingerprints: [String; 2],
    pub identical: bool,
}

/// SHA-256 over the little-endian bytes of every weight, layer by layer.
pub fn weights_fingerprint(weights: &[Matrix64]) -> String {
    let mut h = Sha256::new();
    for w in weights {
        h.update((w.rows() as u64).to_le_bytes());
        h.update((w.cols() as u64).to_le_bytes());
        for v in w.as_slice() {
            h.update(v.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len().max(1) as f64
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.image.validate()?;
    let data = load_image_data(&cfg.image)?;
    run_bench_on(cfg, &data)
}

pub fn run_bench_on(cfg: &BenchConfig, data: &ImageData) -> Result<BenchReport> {
    let image = &cfg.image;
    image.validate()?;
    let run = &image.run;
    let spec = image_network(image, data.train.inputs.cols(), data.train.classes)?;
    let seeds: Vec<u64> = run.seeds().collect();
    let layers = spec.num_layers();

    let bpls = |net: &Network64, seed: u64, workers: usize| -> Result<(Network64, TrainReport, f64)> {
        let mut c = run.bpls_config(seed);
        c.workers = workers;
        let t = Instant::now();
        let (n, r) = train_noninjective_from(
            net,
            &data.train.inputs,
            &data.train.targets,
            &data.train.labels,
            &c,
            |_| {},
        )?;
        Ok((n, r, t.elapsed().as_secs_f64()))
    };

    let mut methods = Vec::new();
    let mut breakdown = None;
    for &method in &run.methods {
        let mut secs = Vec::new();
        let mut reports = Vec::new();
        for &seed in &seeds {
            let init: Network64 = init_weights(&spec, seed, run.bpls.init_low, run.bpls.init_high)?;
            match method {
                Method::Bpls => {
                    let (_, report, s) = bpls(&init, seed, run.workers)?;
                    secs.push(s);
                    reports.push(report);
                }
                Method::Gd(kind) => {
                    let mut opt = run.optimizer(kind, seed, |_| 1e-3);
                    opt.record_loss = false;
                    let t = Instant::now();
                    train_gd_from(
                        &init,
                        &data.train.inputs,
                        &data.train.targets,
                        LossKind::CrossEntropy,
                        &opt,
                        |_, _| {},
                    )?;
                    secs.push(t.elapsed().as_secs_f64());
                }
            }
        }
        let epochs = matches!(method, Method::Gd(_)).then_some(run.epochs_max);
        methods.push(MethodTiming {
            method: method.to_string(),
            mean_seconds: mean(&secs),
            mean_seconds_per_epoch: epochs.filter(|&e| e > 0).map(|e| mean(&secs) / e as f64),
            run_seconds: secs,
            epochs,
        });
        if method == Method::Bpls {
            let n = reports.len() as f64;
            let init: Network64 = init_weights(&spec, seeds[0], run.bpls.init_low, run.bpls.init_high)?;
            let (_, plain) = train_injective_from(
                &init,
                &data.train.inputs,
                &data.train.targets,
                &run.bpls_config(seeds[0]),
            )?;
            let mean_passes = reports.iter().map(|r| (r.iterations_used + 1) as f64).sum::<f64>() / n;
            let mean_layer_solves = reports.iter().map(|r| r.layer_solves as f64).sum::<f64>() / n;
            let layer_seconds = (1..=layers)
                .map(|l| {
                    let name = format!("layer {l}");
                    reports
                        .iter()
                        .flat_map(|r| &r.phases)
                        .filter(|p| p.name == name)
                        .map(|p| p.elapsed.as_secs_f64())
                        .sum::<f64>()
                        / n
                })
                .collect();
            breakdown = Some(BplsBreakdown {
                mean_passes,
                layers,
                mean_layer_solves,
                solves_per_pass: mean_layer_solves / mean_passes,
                injective_pass_solves: plain.layer_solves,
                forward_seconds: reports.iter().map(|r| r.time_in("forward").as_secs_f64()).sum::<f64>() / n,
                layer_seconds,
            });
        }
    }

    let worker_comparison = if run.methods.contains(&Method::Bpls) && cfg.compare_workers > 1 {
        let seed = seeds[0];
        let init: Network64 = init_weights(&spec, seed, run.bpls.init_low, run.bpls.init_high)?;
        let (a, _, sa) = bpls(&init, seed, 1)?;
        let (b, _, sb) = bpls(&init, seed, cfg.compare_workers)?;
        let fa = weights_fingerprint(a.weights());
        let fb = weights_fingerprint(b.weights());
        Some(WorkerComparison {
            workers: [1, cfg.compare_workers],
            seconds: [sa, sb],
            identical: fa == fb,
            fingerprints: [fa, fb],
        })
    } else {
        None
    };

    Ok(BenchReport {
        dataset: image.dataset.to_string(),
        layer_widths: spec.layer_widths.clone(),
        train_samples: data.train.len(),
        seeds,
        workers: run.workers,
        methods,
        bpls_breakdown: breakdown,
        worker_comparison,
    })
}
