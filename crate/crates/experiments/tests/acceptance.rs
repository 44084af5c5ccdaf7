//! End-to-end acceptance checks, one line per criterion.
//!
//! Criteria needing MNIST or Fashion-MNIST are skipped when the IDX files
//! are absent (set `BPLS_DATA_DIR` or link `data/` at the workspace root).
//! A failing criterion prints `FAIL` with its measurements. The process
//! exits nonzero on failure only when `BPLS_ACCEPTANCE_STRICT=1`, so the
//! suite can report known shortfalls without breaking the build.

use std::path::PathBuf;
use std::time::Instant;

use bpls_core::baselines::{backprop_gradients, train_gd_from, LossKind, OptimizerConfig, OptimizerKind};
use bpls_core::bpls::BplsConfig;
use bpls_core::data::{idx_paths, Split, ToyRelationship};
use bpls_core::linalg::{solve_ridge_ls, Matrix, RidgeConfig, DEFAULT_RIDGE_EPSILON};
use bpls_core::network::{init_weights, Activation};
use bpls_core::{Matrix64, Network64, NetworkSpec};
use bpls_experiments::config::{ImageConfig, ImageDataset, Method, RunSettings, ToyConfig};
use bpls_experiments::image::{image_network, load_image_data, run_image_experiment_on, ImageOutcome};
use bpls_experiments::records::write_csv;
use bpls_experiments::toy::{run_toy_sweep, ToyOutcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Suite {
    failures: usize,
}

impl Suite {
    fn report(&mut self, name: &str, status: Status, detail: String) {
        let tag = match status {
            Status::Pass => "PASS",
            Status::Fail => {
                self.failures += 1;
                "FAIL"
            }
            Status::Skip => "SKIP",
        };
        println!("{tag}  {name:<26} {detail}");
    }

    fn check(&mut self, name: &str, ok: bool, detail: String) {
        self.report(name, if ok { Status::Pass } else { Status::Fail }, detail);
    }
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix64 {
    Matrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Plain triple-loop product, kept independent of the library kernels.
fn naive_matmul(a: &Matrix64, b: &Matrix64) -> Matrix64 {
    Matrix::from_fn(a.rows(), b.cols(), |i, j| {
        (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum()
    })
}

fn norm(m: &Matrix64) -> f64 {
    m.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn ls_optimality(suite: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let eps = DEFAULT_RIDGE_EPSILON;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let d = rng.random_range(5..=50);
        let n = rng.random_range(1..=20);
        let m = rng.random_range(1..=5);
        let a = gaussian(&mut rng, d, n);
        let b = gaussian(&mut rng, d, m);
        let w = solve_ridge_ls(&a, &b, RidgeConfig { epsilon: eps }).unwrap();
        let at = a.transpose();
        let atb = naive_matmul(&at, &b);
        let lhs = naive_matmul(&naive_matmul(&at, &a), &w);
        let residual = Matrix::from_fn(n, m, |i, j| lhs[(i, j)] + eps * w[(i, j)] - atb[(i, j)]);
        worst = worst.max(norm(&residual) / norm(&atb));
    }
    suite.check(
        "ls-optimality",
        worst <= 1e-8,
        format!("100 problems, max relative normal-equation residual {worst:.2e} (limit 1e-8)"),
    );
}

fn planted_recovery(suite: &mut Suite) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(1..=20);
        let d = rng.random_range(n + 5..=n + 60);
        let m = rng.random_range(1..=5);
        let a = gaussian(&mut rng, d, n);
        let w_star = gaussian(&mut rng, n, m);
        let b = naive_matmul(&a, &w_star);
        let w = solve_ridge_ls(&a, &b, RidgeConfig { epsilon: 0.0 }).unwrap();
        let err = w
            .as_slice()
            .iter()
            .zip(w_star.as_slice())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    suite.check(
        "planted-recovery",
        worst <= 1e-8,
        format!("50 full-rank problems, eps 0, max |W - W*| {worst:.2e} (limit 1e-8)"),
    );
}

fn gradient_check(suite: &mut Suite) {
    let activations = [
        Activation::identity(),
        Activation::sigmoid(),
        Activation::tanh(),
        Activation::softplus(),
        Activation::elu(1.0),
        Activation::softmax(),
    ];
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for widths in [vec![2, 3, 2], vec![4, 5, 3, 2]] {
        for &hidden in &activations {
            for &output in &activations {
                let mut losses = vec![LossKind::MeanSquaredError];
                if matches!(output.to_string().as_str(), "sigmoid" | "softmax") {
                    losses.push(LossKind::CrossEntropy);
                }
                for loss in losses {
                    let layers = widths.len() - 1;
                    let mut acts = vec![hidden; layers - 1];
                    acts.push(output);
                    let spec = NetworkSpec::new(widths.clone(), acts, false).unwrap();
                    let net: Network64 = init_weights(&spec, cases as u64, -1.0, 1.0).unwrap();
                    let x = gaussian(&mut rng, 3, widths[0]);
                    let raw = gaussian(&mut rng, 3, *widths.last().unwrap());
                    // rows on the probability simplex suit both losses
                    let t = Matrix::from_fn(3, raw.cols(), |i, j| {
                        let s: f64 = raw.row(i).iter().map(|v| v.exp()).sum();
                        raw[(i, j)].exp() / s
                    });
                    let grads = backprop_gradients(&net, &x, &t, loss).unwrap();
                    let value = |w: Vec<Matrix64>| {
                        loss.value(&net.with_weights(w).unwrap().predict(&x).unwrap(), &t)
                            .unwrap()
                    };
                    for l in 0..layers {
                        for k in 0..grads[l].as_slice().len() {
                            let bump = |delta: f64| {
                                let mut w = net.weights().to_vec();
                                w[l].as_mut_slice()[k] += delta;
                                value(w)
                            };
                            let fd = (bump(h) - bump(-h)) / (2.0 * h);
                            let g = grads[l].as_slice()[k];
                            let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-6);
                            worst = worst.max(rel);
                        }
                    }
                    cases += 1;
                }
            }
        }
    }
    suite.check(
        "gradient-check",
        worst <= 1e-4,
        format!("{cases} architecture/activation/loss cases, max relative error {worst:.2e} (limit 1e-4)"),
    );
}

fn run_settings(mc: usize, methods: &[Method], epochs: usize) -> RunSettings {
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

fn toy_config(relationship: ToyRelationship, sigmas: &[f64], methods: &[Method], mc: usize) -> ToyConfig {
    ToyConfig {
        relationship,
        sigmas: sigmas.to_vec(),
        hidden: 3,
        hidden_activation: ToyConfig::default_activation(relationship),
        output_activation: ToyConfig::default_activation(relationship),
        run: run_settings(mc, methods, 1000),
    }
}

fn toy_exact_fit(suite: &mut Suite) {
    let mut cfg = toy_config(ToyRelationship::Linear, &[0.0], &[Method::Bpls], 10);
    let at_default = run_toy_sweep(&cfg).unwrap().points[0].train_rmse;
    cfg.run.bpls.epsilon = 1e-9;
    let rmse = run_toy_sweep(&cfg).unwrap().points[0].train_rmse;
    suite.check(
        "toy-linear-exact-fit",
        rmse <= 1e-6,
        format!("sigma 0, 10 runs, ridge eps 1e-9: train RMSE {rmse:.2e} (limit 1e-6); at default eps 1e-6: {at_default:.2e}"),
    );
}

fn toy_sweep(suite: &mut Suite, relationship: ToyRelationship) {
    let sigmas = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
    let out: ToyOutcome = run_toy_sweep(&toy_config(relationship, &sigmas, &Method::ALL, 100)).unwrap();
    let mut problems = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    for (phase, get) in [
        (
            "train",
            (|p| p.train_rmse) as fn(&bpls_experiments::toy::ToyPoint) -> f64,
        ),
        ("test", |p| p.test_rmse),
    ] {
        let bpls: Vec<f64> = sigmas
            .iter()
            .map(|&s| get(out.point(Method::Bpls, s).unwrap()))
            .collect();
        if let Some(i) = (1..bpls.len()).find(|&i| bpls[i] < bpls[i - 1]) {
            problems.push(format!("{phase} RMSE drops at sigma {}", sigmas[i]));
        }
        for (i, &s) in sigmas.iter().enumerate() {
            // diverged baselines have non-finite RMSE and do not count
            let best = Method::ALL[1..]
                .iter()
                .map(|&m| get(out.point(m, s).unwrap()))
                .filter(|v| v.is_finite())
                .fold(f64::INFINITY, f64::min);
            let ratio = bpls[i] / best;
            worst_ratio = worst_ratio.max(ratio);
            if !(ratio <= 2.0) {
                problems.push(format!(
                    "{phase} sigma {s}: {:.4} vs best baseline {best:.4} ({ratio:.1}x)",
                    bpls[i]
                ));
            }
        }
    }
    let name = format!("toy-sweep-{relationship}");
    let summary = format!("100 runs per sigma, worst BPLS/best-baseline RMSE ratio {worst_ratio:.2} (limit 2)");
    if problems.is_empty() {
        suite.check(&name, true, format!("monotone in sigma, {summary}"));
    } else {
        suite.check(&name, false, format!("{summary}; {}", problems.join("; ")));
    }
}

fn data_dir() -> PathBuf {
    std::env::var_os("BPLS_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data")))
}

fn image_config(dataset: ImageDataset, methods: &[Method], mc: usize, epochs: usize) -> ImageConfig {
    ImageConfig {
        dataset,
        data_dir: data_dir(),
        hidden: vec![60],
        hidden_activation: Activation::sigmoid(),
        output_activation: Activation::softmax(),
        bias: true,
        smoothing: 0.1,
        train_limit: None,
        test_limit: None,
        run: run_settings(mc, methods, epochs),
    }
}

fn available(cfg: &ImageConfig) -> bool {
    let dir = cfg.dataset_dir();
    idx_paths(&dir, Split::Train).is_ok() && idx_paths(&dir, Split::Test).is_ok()
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = v.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn image_accuracy(suite: &mut Suite, name: &str, out: &ImageOutcome, limit: f64) {
    let cas: Vec<String> = out.runs.iter().map(|r| format!("{:.2}", 100.0 * r.test_ca)).collect();
    let ca = out.mean_test_ca(Method::Bpls).unwrap();
    suite.check(
        name,
        ca >= limit,
        format!(
            "5 runs, mean test CA {:.2}% (limit {:.1}%), per run [{}]",
            100.0 * ca,
            100.0 * limit,
            cas.join(", ")
        ),
    );
}

fn weight_bits(weights: &[Matrix64]) -> Vec<u64> {
    weights
        .iter()
        .flat_map(|w| w.as_slice().iter().map(|v| v.to_bits()))
        .collect()
}

fn csv_bytes(records: &[bpls_experiments::records::Record]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(&mut buf, records).unwrap();
    buf
}

fn main() {
    let mut suite = Suite { failures: 0 };
    let start = Instant::now();

    ls_optimality(&mut suite);
    planted_recovery(&mut suite);
    gradient_check(&mut suite);
    toy_exact_fit(&mut suite);
    toy_sweep(&mut suite, ToyRelationship::Linear);
    toy_sweep(&mut suite, ToyRelationship::NonLinear);

    let mnist_cfg = image_config(ImageDataset::Mnist, &[Method::Bpls], 5, 40);
    let fashion_cfg = image_config(ImageDataset::FashionMnist, &[Method::Bpls], 5, 40);
    let mnist = available(&mnist_cfg).then(|| load_image_data(&mnist_cfg).unwrap());
    let fashion = available(&fashion_cfg).then(|| load_image_data(&fashion_cfg).unwrap());
    let skip = |suite: &mut Suite, name: &str, cfg: &ImageConfig| {
        suite.report(
            name,
            Status::Skip,
            format!("IDX files not found in {}", cfg.dataset_dir().display()),
        )
    };

    let mnist_out = mnist.as_ref().map(|d| run_image_experiment_on(&mnist_cfg, d).unwrap());
    let fashion_out = fashion
        .as_ref()
        .map(|d| run_image_experiment_on(&fashion_cfg, d).unwrap());
    match &mnist_out {
        Some(out) => image_accuracy(&mut suite, "mnist-accuracy", out, 0.85),
        None => skip(&mut suite, "mnist-accuracy", &mnist_cfg),
    }
    match &fashion_out {
        Some(out) => image_accuracy(&mut suite, "fashion-mnist-accuracy", out, 0.76),
        None => skip(&mut suite, "fashion-mnist-accuracy", &fashion_cfg),
    }

    match (&mnist_out, &fashion_out) {
        (Some(m), Some(f)) => {
            let iters = |o: &ImageOutcome| o.runs.iter().map(|r| r.best_iteration).collect::<Vec<_>>();
            let (mi, fi) = (iters(m), iters(f));
            let ok = mi.iter().all(|&i| i <= 15) && fi.iter().all(|&i| i <= 10);
            suite.check(
                "convergence-budget",
                ok,
                format!("best iteration per run: mnist {mi:?} (limit 15), fashion-mnist {fi:?} (limit 10)"),
            );
        }
        _ => skip(&mut suite, "convergence-budget", &mnist_cfg),
    }

    // Determinism: reruns write identical bytes, and worker counts 1 and 4
    // give bitwise identical weights.
    {
        let toy = toy_config(ToyRelationship::NonLinear, &[0.0, 0.2, 0.4], &Method::ALL, 5);
        let toy_same =
            csv_bytes(&run_toy_sweep(&toy).unwrap().records) == csv_bytes(&run_toy_sweep(&toy).unwrap().records);
        let mut detail = format!("toy CSV rerun identical: {toy_same}");
        let mut ok = toy_same;
        if let (Some(data), Some(out)) = (&mnist, &mnist_out) {
            let mut small = image_config(
                ImageDataset::Mnist,
                &[Method::Bpls, Method::Gd(OptimizerKind::Sgd)],
                1,
                1,
            );
            small.train_limit = Some(5000);
            small.test_limit = Some(1000);
            let small_data = load_image_data(&small).unwrap();
            let a = csv_bytes(&run_image_experiment_on(&small, &small_data).unwrap().records);
            let b = csv_bytes(&run_image_experiment_on(&small, &small_data).unwrap().records);
            let image_same = a == b;

            let mut four = mnist_cfg.clone();
            four.run.monte_carlo = 1;
            four.run.workers = 4;
            four.run.bpls.workers = 4;
            let four_out = run_image_experiment_on(&four, data).unwrap();
            let weights_same = weight_bits(&four_out.runs[0].weights) == weight_bits(&out.runs[0].weights);
            let csv_same = csv_bytes(&four_out.records) == csv_bytes(&out.records[..four_out.records.len()]);
            ok &= image_same && weights_same && csv_same;
            detail += &format!(
                "; image CSV rerun identical: {image_same}; full-MNIST weights workers 1 vs 4 bitwise equal: {weights_same}; CSV equal: {csv_same}"
            );
        } else {
            detail += "; image checks skipped (no MNIST files)";
        }
        suite.check("determinism", ok, detail);
    }

    match (&mnist, &mnist_out) {
        (Some(data), Some(out)) => {
            let bpls = mean(out.runs.iter().map(|r| r.train_seconds));
            let spec = image_network(&mnist_cfg, data.train.inputs.cols(), data.train.classes).unwrap();
            let init: Network64 = init_weights(&spec, 1, -1.0, 1.0).unwrap();
            // one epoch of each baseline shows which batch-1 run is cheapest
            let mut per_epoch = Vec::new();
            for kind in OptimizerKind::ALL {
                let cfg = OptimizerConfig {
                    epochs_max: 1,
                    record_loss: false,
                    seed: 1,
                    learning_rate: 1e-3,
                    ..OptimizerConfig::new(kind)
                };
                let t = Instant::now();
                train_gd_from(
                    &init,
                    &data.train.inputs,
                    &data.train.targets,
                    LossKind::CrossEntropy,
                    &cfg,
                    |_, _| {},
                )
                .unwrap();
                per_epoch.push((kind, t.elapsed().as_secs_f64()));
            }
            let cheapest = per_epoch.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap().0;
            let cfg = OptimizerConfig {
                epochs_max: 40,
                record_loss: false,
                seed: 1,
                learning_rate: 1e-3,
                ..OptimizerConfig::new(cheapest)
            };
            let t = Instant::now();
            train_gd_from(
                &init,
                &data.train.inputs,
                &data.train.targets,
                LossKind::CrossEntropy,
                &cfg,
                |_, _| {},
            )
            .unwrap();
            let baseline = t.elapsed().as_secs_f64();
            let epochs: Vec<String> = per_epoch.iter().map(|(k, s)| format!("{k} {s:.1}s")).collect();
            suite.check(
                "bpls-faster-than-baseline",
                bpls < baseline,
                format!(
                    "mnist BPLS mean train time {bpls:.1}s vs 40-epoch batch-1 {cheapest} {baseline:.1}s ({:.1}x); one epoch each: {}",
                    baseline / bpls,
                    epochs.join(", ")
                ),
            );
        }
        _ => skip(&mut suite, "bpls-faster-than-baseline", &mnist_cfg),
    }

    println!(
        "{} failing criteria, {:.0}s total",
        suite.failures,
        start.elapsed().as_secs_f64()
    );
    let strict = std::env::var("BPLS_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && suite.failures > 0 {
        std::process::exit(1);
    }
}
