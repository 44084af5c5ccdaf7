mod common;

use std::ffi::OsString;

use bpls_experiments::cli::{config_tokens, expand_config, run_from, Cli, Command};
use bpls_experiments::config::Method;
use bpls_experiments::records::{read_csv, CSV_COLUMNS};
use clap::Parser;

fn args(list: &[&str]) -> Vec<OsString> {
    std::iter::once("bpls")
        .chain(list.iter().copied())
        .map(OsString::from)
        .collect()
}

fn parse(list: &[&str]) -> Cli {
    Cli::try_parse_from(expand_config(args(list)).unwrap()).unwrap()
}

#[test]
fn toy_defaults() {
    let Command::Toy(t) = parse(&["toy"]).command else {
        panic!()
    };
    let cfgs = t.configs();
    assert_eq!(cfgs.len(), 2);
    let c = &cfgs[0];
    assert_eq!(c.run.monte_carlo, 100);
    assert_eq!(c.run.epochs_max, 1000);
    assert_eq!(c.run.methods, Method::ALL);
    assert_eq!(c.sigmas, [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
    assert_eq!(c.hidden, 3);
}

#[test]
fn image_defaults_and_lists() {
    let Command::Image(i) = parse(&["image", "--hidden", "100,70", "--methods", "bpls,adam", "--no-bias"]).command
    else {
        panic!()
    };
    let c = i.config(5, &Method::ALL);
    assert_eq!(c.hidden, [100, 70]);
    assert_eq!(c.run.methods.len(), 2);
    assert!(!c.bias);
    assert_eq!(c.run.epochs_max, 40);
    assert_eq!(c.hidden_activation.to_string(), "sigmoid");
    assert_eq!(c.output_activation.to_string(), "softmax");
}

#[test]
fn config_file_sections_and_precedence() {
    let text = "seed = 7\nmethods = [\"bpls\", \"adam\"]\ntimings = true\n\n[toy]\nmc = 3\nsigmas = [0.0, 0.25]\n\n[image]\nmc = 9\n";
    assert_eq!(
        config_tokens(text, "toy").unwrap(),
        [
            "--methods=bpls,adam",
            "--seed=7",
            "--timings",
            "--mc=3",
            "--sigmas=0,0.25"
        ]
    );
    assert!(config_tokens("[other]\nx = 1\n", "toy").is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    let p = path.to_str().unwrap();
    let Command::Toy(t) = parse(&["toy", "--config", p, "--mc", "1", "--methods", "sgd"]).command else {
        panic!()
    };
    let c = &t.configs()[0];
    assert_eq!(c.run.seed, 7);
    assert_eq!(c.run.monte_carlo, 1);
    assert_eq!(c.run.methods.len(), 1);
    assert!(c.run.timings);
    assert_eq!(c.sigmas, [0.0, 0.25]);
}

#[test]
fn validation_failures_are_errors() {
    assert!(run_from(args(&["toy", "--mc", "0"])).is_err());
    assert!(run_from(args(&["toy", "--sigmas", "-1"])).is_err());
    assert!(run_from(args(&["toy", "--tau-max", "0"])).is_err());
    assert!(run_from(args(&["image", "--output-activation", "tanh", "--methods", "sgd"])).is_err());
    assert!(run_from(args(&["toy", "--no-such-flag"])).is_err());
    assert!(run_from(args(&["bogus"])).is_err());
}

#[test]
fn toy_command_writes_a_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = |name: &str| {
        let path = dir.path().join(name);
        run_from(args(&[
            "toy",
            "--mc",
            "2",
            "--sigmas",
            "0,0.5",
            "--methods",
            "bpls,adagrad",
            "--epochs",
            "20",
            "-o",
            path.to_str().unwrap(),
        ]))
        .unwrap();
        std::fs::read(path).unwrap()
    };
    let a = out("a.csv");
    assert_eq!(a, out("b.csv"));
    let text = String::from_utf8(a.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(read_csv(&a[..]).unwrap().len(), 2 * 2 * 2 * 2);
}

#[test]
fn image_and_bench_commands_on_synthetic_data() {
    let data = common::synthetic_data_dir();
    let out = tempfile::tempdir().unwrap();
    let csv = out.path().join("img.csv");
    let json = out.path().join("bench.json");
    let d = data.path().to_str().unwrap();
    run_from(args(&[
        "image",
        "--data-dir",
        d,
        "--hidden",
        "5",
        "--mc",
        "1",
        "--epochs",
        "1",
        "--methods",
        "bpls,nag",
        "-o",
        csv.to_str().unwrap(),
    ]))
    .unwrap();
    assert!(!read_csv(std::fs::File::open(&csv).unwrap()).unwrap().is_empty());
    run_from(args(&[
        "bench",
        "--data-dir",
        d,
        "--hidden",
        "5",
        "--epochs",
        "1",
        "-o",
        json.to_str().unwrap(),
    ]))
    .unwrap();
    let v: serde_json::Value = serde_json::from_reader(std::fs::File::open(&json).unwrap()).unwrap();
    assert_eq!(v["methods"].as_array().unwrap().len(), 2);
    assert_eq!(v["worker_comparison"]["identical"], true);
}
