//! Command-line front end.
//!
//! A `--config FILE` TOML file supplies defaults for any flag. Top-level keys
//! apply to every subcommand and keys under `[toy]`, `[image]` or `[bench]`
//! apply to that subcommand only. Keys are flag names with `-` or `_`.
//! Flags given on the command line win over the file.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bpls_core::bpls::BplsConfig;
use bpls_core::data::{ToyRelationship, DEFAULT_SMOOTHING};
use bpls_core::linalg::DEFAULT_RIDGE_EPSILON;
use bpls_core::network::Activation;
use clap::{ArgAction, Args, Parser, Subcommand};

use crate::bench::run_bench;
use crate::config::{BenchConfig, ImageConfig, ImageDataset, Method, RunSettings, ToyConfig};
use crate::image::run_image_experiment;
use crate::records::{write_csv, Record};
use crate::toy::run_toy_sweep;

/// Environment variable naming the directory that holds `mnist/` and
/// `fashion-mnist/`.
pub const DATA_DIR_ENV: &str = "BPLS_DATA_DIR";

#[derive(Debug, Parser)]
#[command(name = "bpls", version, about = "Closed-form layer-wise training experiments")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// RMSE versus training noise on the one-input toy problems (CSV).
    Toy(ToyArgs),
    /// Classification accuracy per epoch on MNIST or Fashion-MNIST (CSV).
    Image(ImageArgs),
    /// Training wall time of BPLS and the baselines (JSON).
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML file with default flag values.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, short, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// First seed; Monte Carlo run m uses seed + m.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Monte Carlo runs (subcommand-specific default).
    #[arg(long)]
    pub mc: Option<usize>,
    /// Comma-separated methods: bpls, sgd, momentum, nag, adagrad, adam.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', num_args = 1)]
    pub methods: Option<Vec<Method>>,
    /// Threads inside each BPLS layer solve and evaluation.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Fill the wall_time_s CSV column (makes output nondeterministic).
    #[arg(long)]
    pub timings: bool,
    /// Ridge strength of every BPLS layer solve.
    #[arg(long, default_value_t = DEFAULT_RIDGE_EPSILON)]
    pub epsilon: f64,
    /// Smallest weight magnitude used as a divisor in target back-propagation.
    #[arg(long, default_value_t = 1e-3)]
    pub weight_floor: f64,
    /// Maximum BPLS refinement iterations.
    #[arg(long, default_value_t = 20)]
    pub tau_max: usize,
    /// Targets are clamped to [δ, 1 − δ] before sigmoid or softmax inversion.
    #[arg(long, default_value_t = 1e-6)]
    pub clamp_delta: f64,
    /// Lower bound of the uniform initial weights.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub init_low: f64,
    /// Upper bound of the uniform initial weights.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub init_high: f64,
    /// Baseline epochs (subcommand-specific default).
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub batch_size: usize,
    /// Step size for every baseline (default: per optimizer).
    #[arg(long)]
    pub learning_rate: Option<f64>,
}

impl CommonArgs {
    fn settings(&self, mc: usize, methods: &[Method], epochs: usize) -> RunSettings {
        RunSettings {
            seed: self.seed,
            monte_carlo: self.mc.unwrap_or(mc),
            methods: self.methods.clone().unwrap_or_else(|| methods.to_vec()),
            workers: self.workers,
            timings: self.timings,
            bpls: BplsConfig {
                epsilon: self.epsilon,
                weight_floor: self.weight_floor,
                tau_max: self.tau_max,
                seed: self.seed,
                init_low: self.init_low,
                init_high: self.init_high,
                workers: self.workers,
            },
            clamp_delta: self.clamp_delta,
            epochs_max: self.epochs.unwrap_or(epochs),
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ToyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated toy relationships: linear, nonlinear.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', num_args = 1, default_value = "linear,nonlinear")]
    pub kind: Vec<ToyRelationship>,
    /// Comma-separated training noise levels.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', num_args = 1, default_value = "0,0.1,0.2,0.3,0.4,0.5")]
    pub sigmas: Vec<f64>,
    /// Hidden layer width.
    #[arg(long, default_value_t = 3)]
    pub hidden: usize,
    /// Hidden activation (default: identity for linear, sigmoid for nonlinear).
    #[arg(long)]
    pub hidden_activation: Option<Activation>,
    /// Output activation (default: as the hidden one).
    #[arg(long)]
    pub output_activation: Option<Activation>,
}

impl ToyArgs {
    pub fn configs(&self) -> Vec<ToyConfig> {
        self.kind
            .iter()
            .map(|&relationship| ToyConfig {
                relationship,
                sigmas: self.sigmas.clone(),
                hidden: self.hidden,
                hidden_activation: self
                    .hidden_activation
                    .unwrap_or_else(|| ToyConfig::default_activation(relationship)),
                output_activation: self
                    .output_activation
                    .unwrap_or_else(|| ToyConfig::default_activation(relationship)),
                run: self.common.settings(100, &Method::ALL, 1000),
            })
            .collect()
    }
}

#[derive(Debug, Clone, Args)]
pub struct ImageArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// mnist or fashion-mnist.
    #[arg(long, default_value = "mnist")]
    pub dataset: ImageDataset,
    /// Directory holding mnist/ and fashion-mnist/ IDX files.
    #[arg(long, env = DATA_DIR_ENV, default_value = "data")]
    pub data_dir: PathBuf,
    /// Comma-separated hidden layer widths.
    #[arg(long, action = ArgAction::Set, value_delimiter = ',', num_args = 1, default_value = "60")]
    pub hidden: Vec<usize>,
    /// Hidden activation: identity, sigmoid, tanh, softplus, elu(alpha), softmax.
    #[arg(long, default_value = "sigmoid")]
    pub hidden_activation: Activation,
    #[arg(long, default_value = "softmax")]
    pub output_activation: Activation,
    /// Do not append a constant-1 input feature.
    #[arg(long)]
    pub no_bias: bool,
    /// Label smoothing of the one-hot targets.
    #[arg(long, default_value_t = DEFAULT_SMOOTHING)]
    pub smoothing: f64,
    /// Use only the first N training images.
    #[arg(long)]
    pub train_limit: Option<usize>,
    /// Use only the first N test images.
    #[arg(long)]
    pub test_limit: Option<usize>,
}

impl ImageArgs {
    pub fn config(&self, mc: usize, methods: &[Method]) -> ImageConfig {
        ImageConfig {
            dataset: self.dataset,
            data_dir: self.data_dir.clone(),
            hidden: self.hidden.clone(),
            hidden_activation: self.hidden_activation,
            output_activation: self.output_activation,
            bias: !self.no_bias,
            smoothing: self.smoothing,
            train_limit: self.train_limit,
            test_limit: self.test_limit,
            run: self.common.settings(mc, methods, 40),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub image: ImageArgs,
    /// Worker count whose BPLS weights are compared against one worker.
    #[arg(long, default_value_t = 4)]
    pub compare_workers: usize,
}

impl BenchArgs {
    pub fn config(&self) -> BenchConfig {
        BenchConfig {
            image: self
                .image
                .config(1, &[Method::Bpls, Method::Gd(bpls_core::baselines::OptimizerKind::Sgd)]),
            compare_workers: self.compare_workers,
        }
    }
}

const SUBCOMMANDS: [&str; 3] = ["toy", "image", "bench"];

/// Flag tokens for the TOML file named by `--config`, placed right after the
/// subcommand so that explicit flags override them.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<Option<&str>> = args.iter().map(|a| a.to_str()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        match a {
            Some("--config") => path = strs.get(i + 1).copied().flatten().map(str::to_owned),
            Some(a) if a.starts_with("--config=") => path = Some(a["--config=".len()..].to_owned()),
            _ => {}
        }
    }
    let Some(path) = path else { return Ok(args) };
    let Some(sub_at) = strs.iter().position(|a| a.is_some_and(|a| SUBCOMMANDS.contains(&a))) else {
        return Ok(args);
    };
    let sub = strs[sub_at].unwrap_or_default();
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config file {path}"))?;
    let tokens = config_tokens(&text, sub).with_context(|| format!("in config file {path}"))?;
    let mut out = args[..=sub_at].to_vec();
    out.extend(tokens.into_iter().map(OsString::from));
    out.extend_from_slice(&args[sub_at + 1..]);
    Ok(out)
}

/// Translate a TOML document into `--key=value` tokens for `subcommand`.
pub fn config_tokens(text: &str, subcommand: &str) -> Result<Vec<String>> {
    let table: toml::Table = text.parse()?;
    let mut tokens = Vec::new();
    let mut section = None;
    for (key, value) in &table {
        match value {
            toml::Value::Table(t) if SUBCOMMANDS.contains(&key.as_str()) => {
                if key == subcommand {
                    section = Some(t);
                }
            }
            toml::Value::Table(_) => bail!("unknown section [{key}]"),
            v => push_flag(&mut tokens, key, v)?,
        }
    }
    for (key, value) in section.into_iter().flatten() {
        push_flag(&mut tokens, key, value)?;
    }
    Ok(tokens)
}

fn push_flag(tokens: &mut Vec<String>, key: &str, value: &toml::Value) -> Result<()> {
    let flag = format!("--{}", key.replace('_', "-"));
    if flag == "--config" {
        bail!("a config file cannot name another config file");
    }
    let scalar = |v: &toml::Value| -> Result<String> {
        Ok(match v {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            _ => bail!("key '{key}' must be a string, number or list of them"),
        })
    };
    match value {
        toml::Value::Boolean(true) => tokens.push(flag),
        toml::Value::Boolean(false) => {}
        toml::Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<Result<Vec<_>>>()?;
            tokens.push(format!("{flag}={}", parts.join(",")));
        }
        v => tokens.push(format!("{flag}={}", scalar(v)?)),
    }
    Ok(())
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Parse `args` (program name first) and run the chosen subcommand.
pub fn run_from(args: Vec<OsString>) -> Result<()> {
    let cli = Cli::try_parse_from(expand_config(args)?)?;
    match cli.command {
        Command::Toy(args) => {
            let configs = args.configs();
            for c in &configs {
                c.validate()?;
            }
            let mut records: Vec<Record> = Vec::new();
            for c in &configs {
                let outcome = run_toy_sweep(c)?;
                for p in &outcome.points {
                    eprintln!(
                        "{:<14} sigma={:<4} {:<9} train_rmse={:.6} test_rmse={:.6} diverged={}",
                        crate::toy::experiment_name(c.relationship),
                        p.sigma,
                        p.method.to_string(),
                        p.train_rmse,
                        p.test_rmse,
                        p.diverged_runs
                    );
                }
                records.extend(outcome.records);
            }
            write_csv(open_output(args.common.output.as_deref())?, &records)
        }
        Command::Image(args) => {
            let cfg = args.config(5, &Method::ALL);
            cfg.validate()?;
            let outcome = run_image_experiment(&cfg)?;
            for r in &outcome.runs {
                eprintln!(
                    "{} seed={} {:<9} train_ca={:.4} test_ca={:.4} best_iteration={} seconds={:.2}",
                    cfg.dataset,
                    r.seed,
                    r.method.to_string(),
                    r.train_ca,
                    r.test_ca,
                    r.best_iteration,
                    r.train_seconds
                );
            }
            write_csv(open_output(args.common.output.as_deref())?, &outcome.records)
        }
        Command::Bench(args) => {
            let cfg = args.config();
            cfg.image.validate()?;
            let report = run_bench(&cfg)?;
            let mut out = open_output(args.image.common.output.as_deref())?;
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
            out.flush()?;
            Ok(())
        }
    }
}
