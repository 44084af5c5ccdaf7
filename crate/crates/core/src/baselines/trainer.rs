use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{backprop_gradients, optimizer_step, LossKind, OptimizerConfig, OptimizerKind, OptimizerState};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::network::{init_weights, Network, NetworkSpec};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Default)]
pub struct GdReport {
    pub epochs_run: usize,
    pub steps: u64,
    /// Training loss before the first epoch and after each epoch (empty
    /// unless `record_loss` is set).
    pub loss_history: Vec<f64>,
    /// Epoch during which a weight became non-finite. Training stops there
    /// and the returned network holds the non-finite weights.
    pub diverged_at: Option<usize>,
    pub total_time: Duration,
}

/// Mini-batch gradient training from a seeded random initialization.
pub fn train_gd<T: Scalar>(
    spec: &NetworkSpec,
    inputs: &Matrix<T>,
    targets: &Matrix<T>,
    loss: LossKind,
    cfg: &OptimizerConfig,
    init_seed: u64,
) -> Result<(Network<T>, GdReport)> {
    let initial = init_weights(spec, init_seed, -1.0, 1.0)?;
    train_gd_from(&initial, inputs, targets, loss, cfg, |_, _| {})
}

/// Mini-batch gradient training from given weights.
///
/// Every epoch visits all samples once in an order drawn from a generator
/// seeded with `cfg.seed` on stream `epoch`, so runs are reproducible and
/// each epoch's order is independent of the others. `observe(epoch, net)`
/// runs for epoch 0 (the initial weights) and after every completed epoch.
pub fn train_gd_from<T: Scalar>(
    initial: &Network<T>,
    inputs: &Matrix<T>,
    targets: &Matrix<T>,
    loss: LossKind,
    cfg: &OptimizerConfig,
    mut observe: impl FnMut(usize, &Network<T>),
) -> Result<(Network<T>, GdReport)> {
    cfg.validate()?;
    let d = inputs.rows();
    if targets.shape() != (d, initial.spec().outputs()) {
        return Err(Error::dims(
            "train_gd targets",
            targets.shape(),
            (d, initial.spec().outputs()),
        ));
    }
    if d == 0 {
        return Err(Error::Empty("training inputs"));
    }
    let start = Instant::now();
    let mut net = initial.clone();
    let mut state = OptimizerState::new(net.weights());
    let mut report = GdReport::default();
    if cfg.record_loss {
        report.loss_history.push(loss.value(&net.predict(inputs)?, targets)?);
    }
    observe(0, &net);

    let mut order: Vec<usize> = (0..d).collect();
    'epochs: for epoch in 1..=cfg.epochs_max {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(epoch as u64);
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            let (x, t) = if batch.len() == d && cfg.batch_size >= d {
                (inputs.clone(), targets.clone())
            } else {
                (inputs.select_rows(batch), targets.select_rows(batch))
            };
            let grads = if cfg.kind == OptimizerKind::Nag {
                let ahead = net.with_weights(state.lookahead(net.weights(), cfg))?;
                backprop_gradients(&ahead, &x, &t, loss)?
            } else {
                backprop_gradients(&net, &x, &t, loss)?
            };
            optimizer_step(net.weights_mut(), &mut state, &grads, cfg)?;
            if net.weights().iter().any(|w| w.check_finite().is_err()) {
                report.diverged_at = Some(epoch);
                break 'epochs;
            }
        }
        report.epochs_run = epoch;
        if cfg.record_loss {
            report.loss_history.push(loss.value(&net.predict(inputs)?, targets)?);
        }
        observe(epoch, &net);
    }
    report.steps = state.steps;
    report.total_time = start.elapsed();
    Ok((net, report))
}
