//! RMSE-versus-noise sweeps on the one-input toy problems.

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::Result;
use bpls_core::baselines::{train_gd_from, LossKind};
use bpls_core::bpls::train_injective_from;
use bpls_core::data::{gen_toy, ToyRelationship, ToySpec};
use bpls_core::metrics::rmse_from_squared_errors;
use bpls_core::network::init_weights;
use bpls_core::{Matrix64, Network64, NetworkSpec};

use crate::config::{Method, ToyConfig};
use crate::records::Record;

/// Aggregate RMSE of one method at one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyPoint {
    pub sigma: f64,
    pub method: Method,
    pub train_rmse: f64,
    pub test_rmse: f64,
    pub train_seconds: f64,
    /// Baseline runs whose weights became non-finite. They make the RMSE
    /// non-finite too.
    pub diverged_runs: usize,
}

#[derive(Debug, Clone)]
pub struct ToyOutcome {
    pub points: Vec<ToyPoint>,
    pub records: Vec<Record>,
}

impl ToyOutcome {
    pub fn point(&self, method: Method, sigma: f64) -> Option<&ToyPoint> {
        self.points.iter().find(|p| p.method == method && p.sigma == sigma)
    }
}

pub fn experiment_name(r: ToyRelationship) -> &'static str {
    match r {
        ToyRelationship::Linear => "toy-linear",
        ToyRelationship::NonLinear => "toy-nonlinear",
    }
}

/// Two inputs (x and a constant 1), one hidden layer, two outputs.
pub fn toy_network(cfg: &ToyConfig) -> Result<NetworkSpec> {
    let delta = cfg.run.clamp_delta;
    Ok(NetworkSpec::uniform(
        vec![2, cfg.hidden, 2],
        cfg.hidden_activation.with_clamp(delta),
        cfg.output_activation.with_clamp(delta),
        true,
    )?)
}

/// Per-run squared errors of one (σ, method) cell.
#[derive(Default)]
struct Tally {
    train: Vec<f64>,
    test: Vec<f64>,
    seconds: f64,
    diverged: usize,
}

fn squared_error(net: &Network64, x: &Matrix64, y: &Matrix64) -> Result<f64> {
    let out = net.predict(x)?;
    Ok(out.sub(y)?.squared_norm())
}

/// For every seed, one random network is drawn and shared by all noise
/// levels and methods. Each noise level reuses the seed's standard normal
/// draws scaled by σ.
pub fn run_toy_sweep(cfg: &ToyConfig) -> Result<ToyOutcome> {
    cfg.validate()?;
    let spec = toy_network(cfg)?;
    let run = &cfg.run;
    let mut acc: BTreeMap<(usize, usize), Tally> = BTreeMap::new();

    for seed in run.seeds() {
        let init: Network64 = init_weights(&spec, seed, run.bpls.init_low, run.bpls.init_high)?;
        for (si, &sigma) in cfg.sigmas.iter().enumerate() {
            let data = gen_toy::<f64>(&ToySpec {
                relationship: cfg.relationship,
                sigma,
                seed,
            })?;
            for (mi, &method) in run.methods.iter().enumerate() {
                let t = Instant::now();
                let mut diverged = false;
                let net = match method {
                    Method::Bpls => {
                        train_injective_from(&init, &data.train_inputs, &data.train_targets, &run.bpls_config(seed))?.0
                    }
                    Method::Gd(kind) => {
                        let opt = run.optimizer(kind, seed, |k| k.default_learning_rate());
                        let (net, report) = train_gd_from(
                            &init,
                            &data.train_inputs,
                            &data.train_targets,
                            LossKind::MeanSquaredError,
                            &opt,
                            |_, _| {},
                        )?;
                        diverged = report.diverged_at.is_some();
                        net
                    }
                };
                let secs = t.elapsed().as_secs_f64();
                let tally = acc.entry((si, mi)).or_default();
                tally
                    .train
                    .push(squared_error(&net, &data.train_inputs, &data.train_targets)?);
                tally
                    .test
                    .push(squared_error(&net, &data.test_inputs, &data.test_targets)?);
                tally.seconds += secs;
                tally.diverged += usize::from(diverged);
            }
        }
    }

    let experiment = experiment_name(cfg.relationship);
    let mut points = Vec::new();
    let mut records = Vec::new();
    for ((si, mi), tally) in acc {
        let secs = tally.seconds;
        let point = ToyPoint {
            sigma: cfg.sigmas[si],
            method: run.methods[mi],
            train_rmse: rmse_from_squared_errors(&tally.train)?,
            test_rmse: rmse_from_squared_errors(&tally.test)?,
            train_seconds: secs,
            diverged_runs: tally.diverged,
        };
        for (phase, value) in [("train", point.train_rmse), ("test", point.test_rmse)] {
            records.push(Record {
                experiment: experiment.into(),
                method: point.method.to_string(),
                seed: run.seed,
                sigma: Some(point.sigma),
                epoch: None,
                phase: phase.into(),
                metric_name: "rmse".into(),
                metric_value: value,
                wall_time_s: run.timings.then_some(secs),
            });
        }
        points.push(point);
    }
    Ok(ToyOutcome { points, records })
}
