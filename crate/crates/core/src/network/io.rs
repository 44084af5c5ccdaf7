//! Plain-text network files.
//!
//! ```text
//! bpls-network v1
//! scalar f64
//! widths 3 4 2
//! activations sigmoid softmax
//! bias_feature true
//! layer 1 3 4
//! <3 lines of 4 space-separated values>
//! layer 2 4 2
//! <4 lines of 2 values>
//! ```
//!
//! Values are written with Rust's shortest round-trip formatting, so a
//! save/load cycle reproduces every weight bit for bit. Blank lines and
//! lines starting with `#` are ignored.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::network::{Activation, Network, NetworkSpec};
use crate::scalar::Scalar;

pub const NETWORK_FORMAT_HEADER: &str = "bpls-network v1";

impl<T: Scalar> Network<T> {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let spec = self.spec();
        writeln!(w, "{NETWORK_FORMAT_HEADER}")?;
        writeln!(w, "scalar {}", T::NAME)?;
        writeln!(w, "widths {}", join(spec.layer_widths.iter()))?;
        writeln!(w, "activations {}", join(spec.activations.iter()))?;
        writeln!(w, "bias_feature {}", spec.include_bias_feature)?;
        for (l, m) in self.weights().iter().enumerate() {
            writeln!(w, "layer {} {} {}", l + 1, m.rows(), m.cols())?;
            for row in m.row_iter() {
                writeln!(w, "{}", join(row.iter()))?;
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r)
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| {
                l.as_ref()
                    .map(|s| !s.trim().is_empty() && !s.trim_start().starts_with('#'))
                    .unwrap_or(true)
            });
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((n, Ok(s))) => Ok((n, s.trim().to_string())),
                Some((_, Err(e))) => Err(e.into()),
                None => Err(Error::Parse {
                    line: 0,
                    message: format!("unexpected end of file, expected {what}"),
                }),
            }
        };

        let (n, header) = next("header")?;
        if header != NETWORK_FORMAT_HEADER {
            return Err(parse_err(
                n,
                format!("expected '{NETWORK_FORMAT_HEADER}', found '{header}'"),
            ));
        }
        let (n, scalar) = next("scalar")?;
        let scalar = field(n, &scalar, "scalar")?;
        if scalar != T::NAME {
            return Err(parse_err(n, format!("file stores {scalar}, reading as {}", T::NAME)));
        }
        let (n, widths) = next("widths")?;
        let widths = field(n, &widths, "widths")?
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| parse_err(n, format!("width '{t}': {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let (n, acts) = next("activations")?;
        let activations = field(n, &acts, "activations")?
            .split_whitespace()
            .map(|t| t.parse::<Activation>().map_err(|e| parse_err(n, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let (n, bias) = next("bias_feature")?;
        let include_bias_feature = field(n, &bias, "bias_feature")?
            .parse::<bool>()
            .map_err(|e| parse_err(n, e.to_string()))?;
        let spec = NetworkSpec::new(widths, activations, include_bias_feature)?;

        let mut weights = Vec::with_capacity(spec.num_layers());
        for l in 1..=spec.num_layers() {
            let (n, head) = next("layer header")?;
            let nums: Vec<&str> = field(n, &head, "layer")?.split_whitespace().collect();
            let (rows, cols) = spec.weight_shape(l);
            let expected = [l.to_string(), rows.to_string(), cols.to_string()];
            if nums != expected.iter().map(String::as_str).collect::<Vec<_>>() {
                return Err(parse_err(
                    n,
                    format!("expected 'layer {l} {rows} {cols}', found '{head}'"),
                ));
            }
            let mut data = Vec::with_capacity(rows * cols);
            for _ in 0..rows {
                let (n, row) = next("weight row")?;
                let before = data.len();
                for t in row.split_whitespace() {
                    data.push(t.parse::<T>().map_err(|_| parse_err(n, format!("bad number '{t}'")))?);
                }
                if data.len() - before != cols {
                    return Err(parse_err(
                        n,
                        format!("expected {cols} values, found {}", data.len() - before),
                    ));
                }
            }
            weights.push(Matrix::from_untrusted(rows, cols, data)?);
        }
        if let Some((n, Ok(extra))) = lines.next() {
            return Err(parse_err(n, format!("unexpected trailing content '{extra}'")));
        }
        Network::from_weights(spec, weights)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(File::open(path)?)
    }
}

fn join<I: Iterator<Item = D>, D: std::fmt::Display>(it: I) -> String {
    it.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn parse_err(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

fn field<'a>(line: usize, s: &'a str, key: &str) -> Result<&'a str> {
    match s.split_once(char::is_whitespace) {
        Some((k, rest)) if k == key => Ok(rest.trim()),
        _ if s == key => Ok(""),
        _ => Err(parse_err(line, format!("expected '{key} ...', found '{s}'"))),
    }
}
