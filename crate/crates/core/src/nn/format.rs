//! Text serialization of a single [`Mlp`].
//!
//! ```text
//! stackfuse-mlp v1
//! sizes <in> <hidden> <out>
//! activation <kind> <steepness>     (hidden layer)
//! activation <kind> <steepness>     (output layer)
//! weights_ih                        then <hidden> rows of <in> values
//! weights_ho                        then <out> rows of <hidden> values
//! bias_h                            then one row of <hidden> values
//! bias_o                            then one row of <out> values
//! ```

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};

use super::activation::ActivationKind;
use super::mlp::Mlp;
use crate::error::{Error, Result};
use crate::textfmt::{fmt_f64, join_f64};

pub const MLP_HEADER: &str = "stackfuse-mlp v1";

pub fn mlp_to_string(net: &Mlp) -> String {
    let mut s = String::new();
    writeln!(s, "{MLP_HEADER}").unwrap();
    writeln!(s, "sizes {} {} {}", net.input_size(), net.hidden_size(), net.output_size()).unwrap();
    for act in [net.hidden_activation(), net.output_activation()] {
        writeln!(s, "activation {} {}", act.name(), fmt_f64(act.steepness())).unwrap();
    }
    writeln!(s, "weights_ih").unwrap();
    for row in net.weights_ih().rows() {
        writeln!(s, "{}", join_f64(row.iter())).unwrap();
    }
    writeln!(s, "weights_ho").unwrap();
    for row in net.weights_ho().rows() {
        writeln!(s, "{}", join_f64(row.iter())).unwrap();
    }
    writeln!(s, "bias_h").unwrap();
    writeln!(s, "{}", join_f64(net.bias_h().iter())).unwrap();
    writeln!(s, "bias_o").unwrap();
    writeln!(s, "{}", join_f64(net.bias_o().iter())).unwrap();
    s
}

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, line)) => Ok((i + 1, line.trim_end())),
            None => Err(Error::format(self.path, format!("unexpected end of file, expected {what}"))),
        }
    }

    fn expect(&mut self, literal: &str) -> Result<()> {
        let (row, line) = self.next(literal)?;
        if line != literal {
            return Err(self.err(row, format!("expected `{literal}`, found `{line}`")));
        }
        Ok(())
    }

    fn floats(&mut self, what: &str, count: usize) -> Result<Vec<f64>> {
        let (row, line) = self.next(what)?;
        let values = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| self.err(row, format!("`{t}` is not a number"))))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != count {
            return Err(self.err(row, format!("{what}: expected {count} values, found {}", values.len())));
        }
        Ok(values)
    }

    fn err(&self, row: usize, message: String) -> Error {
        Error::Parse { path: self.path.to_path_buf(), row, message }
    }
}

/// Parses a network written by [`mlp_to_string`]. `path` only labels errors.
pub fn mlp_from_str(text: &str, path: &Path) -> Result<Mlp> {
    let mut lines = Lines { path, inner: text.lines().enumerate() };
    lines.expect(MLP_HEADER)?;

    let (row, sizes) = lines.next("sizes")?;
    let dims: Vec<usize> = match sizes.strip_prefix("sizes ") {
        Some(rest) => rest
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| lines.err(row, format!("bad size `{t}`"))))
            .collect::<Result<_>>()?,
        None => return Err(lines.err(row, "expected `sizes`".to_owned())),
    };
    let [input, hidden, output] = dims[..] else {
        return Err(lines.err(row, "sizes needs three values".to_owned()));
    };

    let mut acts = Vec::with_capacity(2);
    for _ in 0..2 {
        let (row, line) = lines.next("activation")?;
        let parts: Vec<&str> = line.split_whitespace().collect();
        let act = match parts[..] {
            ["activation", kind, steep] => steep.parse::<f64>().ok().and_then(|s| ActivationKind::from_name(kind, s)),
            _ => None,
        };
        acts.push(act.ok_or_else(|| lines.err(row, format!("bad activation line `{line}`")))?);
    }

    let mut read_matrix = |name: &str, rows: usize, cols: usize| -> Result<Array2<f64>> {
        lines.expect(name)?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(lines.floats(name, cols)?);
        }
        Ok(Array2::from_shape_vec((rows, cols), data).expect("sized by loop"))
    };
    let weights_ih = read_matrix("weights_ih", hidden, input)?;
    let weights_ho = read_matrix("weights_ho", output, hidden)?;
    let bias_h = Array1::from(read_matrix("bias_h", 1, hidden)?.into_raw_vec_and_offset().0);
    let bias_o = Array1::from(read_matrix("bias_o", 1, output)?.into_raw_vec_and_offset().0);

    Mlp::from_parts(weights_ih, weights_ho, bias_h, bias_o, acts[0], acts[1])
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn save_mlp(net: &Mlp, path: &Path) -> Result<()> {
    std::fs::write(path, mlp_to_string(net)).map_err(|e| Error::io(path, e))
}

pub fn load_mlp(path: &Path) -> Result<Mlp> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    mlp_from_str(&text, path)
}
