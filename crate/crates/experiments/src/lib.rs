//! Experiment runners behind the `bpls` command-line tool.

pub mod bench;
pub mod cli;
pub mod config;
pub mod image;
pub mod records;
pub mod toy;
