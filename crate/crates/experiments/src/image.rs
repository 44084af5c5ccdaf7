//! Classification accuracy per epoch on MNIST-layout image datasets.

use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use bpls_core::baselines::{train_gd_from, LossKind};
use bpls_core::bpls::train_noninjective_from;
use bpls_core::data::{load_mnist_dir, Split};
use bpls_core::metrics::classification_accuracy;
use bpls_core::network::init_weights;
use bpls_core::{Dataset64, Network64, NetworkSpec};

use crate::config::{ImageConfig, Method};
use crate::records::Record;

/// Result of one (seed, method) training run.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageRun {
    pub seed: u64,
    pub method: Method,
    pub train_ca: f64,
    pub test_ca: f64,
    /// BPLS: refinement iteration of the returned weights. Baselines: epochs
    /// run.
    pub best_iteration: usize,
    pub iterations_used: usize,
    pub miss_counts: Vec<usize>,
    /// Training time without the per-epoch evaluations.
    pub train_seconds: f64,
    pub weights: Vec<bpls_core::Matrix64>,
}

#[derive(Debug, Clone)]
pub struct ImageOutcome {
    pub runs: Vec<ImageRun>,
    pub records: Vec<Record>,
}

impl ImageOutcome {
    pub fn runs_of(&self, method: Method) -> impl Iterator<Item = &ImageRun> {
        self.runs.iter().filter(move |r| r.method == method)
    }

    pub fn mean_test_ca(&self, method: Method) -> Option<f64> {
        let v: Vec<f64> = self.runs_of(method).map(|r| r.test_ca).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

#[derive(Debug, Clone)]
pub struct ImageData {
    pub train: Dataset64,
    pub test: Dataset64,
}

pub fn load_image_data(cfg: &ImageConfig) -> Result<ImageData> {
    let dir = cfg.dataset_dir();
    let load = |split, limit| {
        load_mnist_dir::<f64>(&dir, split, cfg.bias, cfg.smoothing, limit)
            .with_context(|| format!("loading {} {split:?} data from {}", cfg.dataset, dir.display()))
    };
    Ok(ImageData {
        train: load(Split::Train, cfg.train_limit)?,
        test: load(Split::Test, cfg.test_limit)?,
    })
}

pub fn image_network(cfg: &ImageConfig, inputs: usize, classes: usize) -> Result<NetworkSpec> {
    let mut widths = vec![inputs];
    widths.extend(&cfg.hidden);
    widths.push(classes);
    let delta = cfg.run.clamp_delta;
    // the bias column, when present, is already part of the inputs
    Ok(NetworkSpec::uniform(
        widths,
        cfg.hidden_activation.with_clamp(delta),
        cfg.output_activation.with_clamp(delta),
        false,
    )?)
}

/// Load the dataset and run every (seed, method) pair.
pub fn run_image_experiment(cfg: &ImageConfig) -> Result<ImageOutcome> {
    cfg.validate()?;
    let data = load_image_data(cfg)?;
    run_image_experiment_on(cfg, &data)
}

/// Every method of a seed starts from the same random network.
pub fn run_image_experiment_on(cfg: &ImageConfig, data: &ImageData) -> Result<ImageOutcome> {
    cfg.validate()?;
    let spec = image_network(cfg, data.train.inputs.cols(), data.train.classes)?;
    let experiment = cfg.dataset.to_string();
    let run = &cfg.run;
    let mut runs = Vec::new();
    let mut records = Vec::new();

    for seed in run.seeds() {
        let init: Network64 = init_weights(&spec, seed, run.bpls.init_low, run.bpls.init_high)?;
        for &method in &run.methods {
            let mut push = |epoch: Option<usize>, phase: &str, name: &str, value: f64, secs: f64| {
                records.push(Record {
                    experiment: experiment.clone(),
                    method: method.to_string(),
                    seed,
                    sigma: None,
                    epoch,
                    phase: phase.into(),
                    metric_name: name.into(),
                    metric_value: value,
                    wall_time_s: run.timings.then_some(secs),
                });
            };
            let test_ca = |net: &Network64| -> Result<f64> {
                Ok(classification_accuracy(
                    &net.predict_with_workers(&data.test.inputs, run.workers)?,
                    &data.test.labels,
                )?)
            };
            let train_ca = |net: &Network64| -> Result<f64> {
                Ok(classification_accuracy(
                    &net.predict_with_workers(&data.train.inputs, run.workers)?,
                    &data.train.labels,
                )?)
            };

            push(Some(0), "train", "ca", train_ca(&init)?, 0.0);
            push(Some(0), "test", "ca", test_ca(&init)?, 0.0);

            let mut eval_time = Duration::ZERO;
            let mut failure = None;
            let mut rows: Vec<(usize, f64, f64, f64)> = Vec::new();
            let start = Instant::now();
            let (net, best_iteration, iterations_used, miss_counts) = match method {
                Method::Bpls => {
                    let d = data.train.len() as f64;
                    let (net, report) = train_noninjective_from(
                        &init,
                        &data.train.inputs,
                        &data.train.targets,
                        &data.train.labels,
                        &run.bpls_config(seed),
                        |it| {
                            let t = Instant::now();
                            let trained = (start.elapsed() - eval_time).as_secs_f64();
                            match test_ca(it.network) {
                                Ok(ca) => rows.push((it.tau + 1, 1.0 - it.misses as f64 / d, ca, trained)),
                                Err(e) => failure = failure.take().or(Some(e)),
                            }
                            eval_time += t.elapsed();
                        },
                    )?;
                    (net, report.best_iteration, report.iterations_used, report.miss_counts)
                }
                Method::Gd(kind) => {
                    let mut opt = run.optimizer(kind, seed, |_| 1e-3);
                    opt.record_loss = false;
                    let (net, report) = train_gd_from(
                        &init,
                        &data.train.inputs,
                        &data.train.targets,
                        LossKind::CrossEntropy,
                        &opt,
                        |epoch, net| {
                            if epoch == 0 {
                                return;
                            }
                            let t = Instant::now();
                            let trained = (start.elapsed() - eval_time).as_secs_f64();
                            match train_ca(net).and_then(|tr| Ok((tr, test_ca(net)?))) {
                                Ok((tr, te)) => rows.push((epoch, tr, te, trained)),
                                Err(e) => failure = failure.take().or(Some(e)),
                            }
                            eval_time += t.elapsed();
                        },
                    )?;
                    (net, report.epochs_run, report.epochs_run, Vec::new())
                }
            };
            let train_seconds = (start.elapsed() - eval_time).as_secs_f64();
            if let Some(e) = failure {
                return Err(e);
            }
            for (epoch, tr, te, secs) in rows {
                push(Some(epoch), "train", "ca", tr, secs);
                push(Some(epoch), "test", "ca", te, secs);
            }
            let final_train = train_ca(&net)?;
            let final_test = test_ca(&net)?;
            push(None, "train", "ca_final", final_train, train_seconds);
            push(None, "test", "ca_final", final_test, train_seconds);
            runs.push(ImageRun {
                seed,
                method,
                train_ca: final_train,
                test_ca: final_test,
                best_iteration,
                iterations_used,
                miss_counts,
                train_seconds,
                weights: net.into_weights(),
            });
        }
    }
    Ok(ImageOutcome { runs, records })
}
