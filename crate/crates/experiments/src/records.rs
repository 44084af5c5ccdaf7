//! The experiment CSV schema.
//!
//! Columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `experiment` | `toy-linear`, `toy-nonlinear`, `mnist` or `fashion-mnist` |
//! | `method` | `bpls`, `sgd`, `momentum`, `nag`, `adagrad`, `adam` |
//! | `seed` | run seed; for aggregated toy rows the first seed of the block |
//! | `sigma` | training noise std (toy rows only, empty otherwise) |
//! | `epoch` | image rows: baseline epoch, or BPLS iterate + 1 (0 = initial weights); empty for toys |
//! | `phase` | `train` or `test` |
//! | `metric_name` | `rmse`, `ca` or `ca_final` (accuracy of the returned network) |
//! | `metric_value` | the metric |
//! | `wall_time_s` | training seconds up to this row, only with `--timings` |

use std::io::Write;

use anyhow::Result;
use serde::{Deserialize, Serialize};

pub const CSV_COLUMNS: [&str; 9] = [
    "experiment",
    "method",
    "seed",
    "sigma",
    "epoch",
    "phase",
    "metric_name",
    "metric_value",
    "wall_time_s",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub experiment: String,
    pub method: String,
    pub seed: u64,
    pub sigma: Option<f64>,
    pub epoch: Option<usize>,
    pub phase: String,
    pub metric_name: String,
    pub metric_value: f64,
    pub wall_time_s: Option<f64>,
}

pub fn write_csv(out: impl Write, records: &[Record]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(input: impl std::io::Read) -> Result<Vec<Record>> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}
