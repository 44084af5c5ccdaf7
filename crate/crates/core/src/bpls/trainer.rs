//! Injective (single pass) and classification (miss-set refinement)
//! trainers.

use std::time::Instant;

use crate::bpls::{backprop_neuron_targets, blend_weights, solve_layer_weights, BplsConfig, TargetPlan, TrainReport};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics::{argmax_rows, rmse};
use crate::network::{init_weights, Network, NetworkSpec};
use crate::scalar::Scalar;

/// Weights produced by one output-to-input sweep.
#[derive(Debug, Clone)]
pub struct PassOutcome<T> {
    pub network: Network<T>,
    pub plan: TargetPlan<T>,
    pub layer_solves: usize,
    pub target_backprops: usize,
}

/// One sweep from the output layer down to the first layer.
///
/// The forward pass through `start` supplies every layer's inputs. For each
/// layer `l = L+1, ..., 1` the desired activations are inverted through the
/// layer activation, the layer weights are solved, and (for `l > 1`) the
/// desired activations of layer `l − 1` are back-propagated through them.
/// With `refit` the layer is solved a second time using those
/// back-propagated activations as its inputs, which is the classification
/// variant.
pub fn bpls_pass<T: Scalar>(
    start: &Network<T>,
    inputs: &Matrix<T>,
    desired: &Matrix<T>,
    cfg: &BplsConfig,
    refit: bool,
    report: &mut TrainReport,
) -> Result<PassOutcome<T>> {
    let spec = start.spec();
    if desired.shape() != (inputs.rows(), spec.outputs()) {
        return Err(Error::dims(
            "bpls desired outputs",
            desired.shape(),
            (inputs.rows(), spec.outputs()),
        ));
    }
    let t0 = Instant::now();
    let cache = start.forward_with_workers(inputs, cfg.workers)?;
    report.phase("forward", t0.elapsed());

    let layers = spec.num_layers();
    let mut plan = TargetPlan::new(desired.clone(), layers - 1);
    let mut network = start.clone();
    let mut solves = 0;
    let mut backprops = 0;

    let mut wanted: Matrix<T> = desired.clone();
    for l in (1..=layers).rev() {
        let t = Instant::now();
        let targets = spec.activation(l).invert(&wanted);
        let layer_inputs = cache.layer_input(inputs, l);
        let mut weights = solve_layer_weights(layer_inputs, &targets, cfg)?;
        solves += 1;
        if l > 1 {
            let below = backprop_neuron_targets(&weights, layer_inputs, &targets, cfg)?;
            backprops += 1;
            if refit {
                weights = solve_layer_weights(&below, &targets, cfg)?;
                solves += 1;
            }
            plan.desired_neurons[l - 2] = Some(below.clone());
            wanted = below;
        }
        network.set_layer(l, weights);
        report.phase(format!("layer {l}"), t.elapsed());
    }
    report.layer_solves += solves;
    report.target_backprops += backprops;
    Ok(PassOutcome {
        network,
        plan,
        layer_solves: solves,
        target_backprops: backprops,
    })
}

/// Single-pass training for injective input/output maps.
pub fn train_injective<T: Scalar>(
    spec: &NetworkSpec,
    inputs: &Matrix<T>,
    desired: &Matrix<T>,
    cfg: &BplsConfig,
) -> Result<(Network<T>, TrainReport)> {
    cfg.validate()?;
    let initial = init_weights(spec, cfg.seed, cfg.init_low, cfg.init_high)?;
    train_injective_from(&initial, inputs, desired, cfg)
}

/// [`train_injective`] starting from given weights instead of a seeded draw.
pub fn train_injective_from<T: Scalar>(
    initial: &Network<T>,
    inputs: &Matrix<T>,
    desired: &Matrix<T>,
    cfg: &BplsConfig,
) -> Result<(Network<T>, TrainReport)> {
    cfg.validate()?;
    let start = Instant::now();
    let mut report = TrainReport {
        seed: cfg.seed,
        metric_name: "rmse",
        ..Default::default()
    };
    let outcome = bpls_pass(initial, inputs, desired, cfg, false, &mut report)?;
    let output = outcome.network.predict_with_workers(inputs, cfg.workers)?;
    report.metric_history.push(rmse(&[(&output, desired)])?);
    report.total_time = start.elapsed();
    Ok((outcome.network, report))
}

/// State of the classification trainer after iteration `tau` (0 is the
/// initial full pass).
#[derive(Debug)]
pub struct Iterate<'a, T> {
    pub tau: usize,
    pub misses: usize,
    pub network: &'a Network<T>,
}

/// Classification training with miss-set refinement.
pub fn train_noninjective<T: Scalar>(
    spec: &NetworkSpec,
    inputs: &Matrix<T>,
    desired: &Matrix<T>,
    labels: &[usize],
    cfg: &BplsConfig,
) -> Result<(Network<T>, TrainReport)> {
    cfg.validate()?;
    let initial = init_weights(spec, cfg.seed, cfg.init_low, cfg.init_high)?;
    train_noninjective_from(&initial, inputs, desired, labels, cfg, |_| {})
}

/// Classification training from given initial weights.
///
/// 1. A full refit pass over all data gives the first estimate and its
///    miss count `μ(0)`.
/// 2. While the last iteration improved `μ` and `τ ≤ tau_max`: run a refit
///    pass on the misclassified samples only, starting from the current
///    weights; blend `(1 − m/D)·w + (m/D)·w_miss` with `m` misses out of `D`
///    samples; recount misses.
/// 3. Return the weights with the fewest misses (the earliest on ties).
///
/// `observe` sees every iterate, including those that get discarded.
pub fn train_noninjective_from<T: Scalar>(
    initial: &Network<T>,
    inputs: &Matrix<T>,
    desired: &Matrix<T>,
    labels: &[usize],
    cfg: &BplsConfig,
    mut observe: impl FnMut(&Iterate<'_, T>),
) -> Result<(Network<T>, TrainReport)> {
    cfg.validate()?;
    let d = inputs.rows();
    if labels.len() != d {
        return Err(Error::LengthMismatch {
            what: "labels",
            expected: d,
            actual: labels.len(),
        });
    }
    if d == 0 {
        return Err(Error::Empty("training inputs"));
    }
    let start = Instant::now();
    let mut report = TrainReport {
        seed: cfg.seed,
        metric_name: "ca",
        ..Default::default()
    };

    let mut current = bpls_pass(initial, inputs, desired, cfg, true, &mut report)?.network;
    let mut missed = miss_indices(&current, inputs, labels, cfg.workers)?;
    record(&mut report, missed.len(), d);
    observe(&Iterate {
        tau: 0,
        misses: missed.len(),
        network: &current,
    });
    let mut best = current.clone();
    let mut best_misses = missed.len();

    let mut tau = 1;
    while tau <= cfg.tau_max && !missed.is_empty() {
        let t = Instant::now();
        let sub_inputs = inputs.select_rows(&missed);
        let sub_desired = desired.select_rows(&missed);
        let refined = bpls_pass(&current, &sub_inputs, &sub_desired, cfg, true, &mut report)?.network;
        let ratio = missed.len() as f64 / d as f64;
        let blended = blend_weights(current.weights(), refined.weights(), ratio)?;
        current = current.with_weights(blended)?;
        let previous = missed.len();
        missed = miss_indices(&current, inputs, labels, cfg.workers)?;
        record(&mut report, missed.len(), d);
        report.iterations_used = tau;
        report.phase(format!("refine {tau}"), t.elapsed());
        observe(&Iterate {
            tau,
            misses: missed.len(),
            network: &current,
        });
        if missed.len() < best_misses {
            best_misses = missed.len();
            best = current.clone();
            report.best_iteration = tau;
        }
        if missed.len() >= previous {
            break;
        }
        tau += 1;
    }
    report.total_time = start.elapsed();
    Ok((best, report))
}

fn record(report: &mut TrainReport, misses: usize, d: usize) {
    report.miss_counts.push(misses);
    report.metric_history.push(1.0 - misses as f64 / d as f64);
}

/// Indices of samples whose predicted class (lowest-index argmax) differs
/// from the label.
pub fn miss_indices<T: Scalar>(
    net: &Network<T>,
    inputs: &Matrix<T>,
    labels: &[usize],
    workers: usize,
) -> Result<Vec<usize>> {
    let out = net.predict_with_workers(inputs, workers)?;
    Ok(argmax_rows(&out)
        .into_iter()
        .zip(labels)
        .enumerate()
        .filter(|(_, (p, l))| p != *l)
        .map(|(i, _)| i)
        .collect())
}
