//! Plain-text model persistence. See `docs/model-format.md` for the layout.
//!
//! Floats are written in shortest round-trip scientific notation, so a model
//! read back is bit-identical to the one written and writing the same model
//! twice yields the same bytes.

use super::{Model, NetworkError, NetworkSpec, WeightStack};
use crate::activation::{Activation, ActivationKind};
use crate::linalg::Matrix;
use std::io::{BufRead, Write};
use thiserror::Error;

pub const MODEL_MAGIC: &str = "karspace-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported model version {0}")]
    Version(u32),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

pub fn write_model<W: Write>(model: &Model, mut out: W) -> Result<(), ModelFileError> {
    let spec = &model.spec;
    writeln!(out, "{MODEL_MAGIC} {MODEL_VERSION}")?;
    writeln!(out, "input_dim {}", spec.input_dim())?;
    let widths: Vec<String> = spec.widths().iter().map(|h| h.to_string()).collect();
    writeln!(out, "widths {}", widths.join(" "))?;
    for (i, a) in spec.activations().iter().enumerate() {
        writeln!(
            out,
            "activation {} {} {:e} {:e}",
            i + 1,
            a.kind.as_str(),
            a.shift,
            a.clip_epsilon
        )?;
    }
    for (i, w) in model.weights.layers().iter().enumerate() {
        writeln!(out, "layer {} {} {}", i + 1, w.nrows(), w.ncols())?;
        for r in 0..w.nrows() {
            let row: Vec<String> = (0..w.ncols()).map(|c| format!("{:e}", w[(r, c)])).collect();
            writeln!(out, "{}", row.join(" "))?;
        }
    }
    writeln!(out, "end")?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String, ModelFileError> {
        self.number += 1;
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(self.err("unexpected end of file")),
        }
    }

    fn err(&self, message: impl Into<String>) -> ModelFileError {
        ModelFileError::Parse {
            line: self.number,
            message: message.into(),
        }
    }

    /// Next line split into tokens, checking the leading keyword.
    fn keyed(&mut self, key: &str) -> Result<Vec<String>, ModelFileError> {
        let line = self.next_line()?;
        let mut tokens = line.split_whitespace().map(str::to_owned);
        match tokens.next() {
            Some(k) if k == key => Ok(tokens.collect()),
            other => Err(self.err(format!("expected `{key}`, found {other:?}"))),
        }
    }

    fn parse<T: std::str::FromStr>(&self, token: &str) -> Result<T, ModelFileError> {
        token
            .parse()
            .map_err(|_| self.err(format!("cannot parse `{token}`")))
    }
}

pub fn read_model<R: BufRead>(input: R) -> Result<Model, ModelFileError> {
    let mut lines = Lines {
        inner: input.lines(),
        number: 0,
    };
    let header = lines.keyed(MODEL_MAGIC)?;
    let version: u32 = match header.as_slice() {
        [v] => lines.parse(v)?,
        _ => return Err(lines.err("malformed header")),
    };
    if version != MODEL_VERSION {
        return Err(ModelFileError::Version(version));
    }
    let input_dim: usize = match lines.keyed("input_dim")?.as_slice() {
        [d] => lines.parse(d)?,
        _ => return Err(lines.err("malformed input_dim")),
    };
    let widths = lines
        .keyed("widths")?
        .iter()
        .map(|t| lines.parse::<usize>(t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut activations = Vec::with_capacity(widths.len());
    for k in 1..=widths.len() {
        let tokens = lines.keyed("activation")?;
        let [idx, kind, shift, eps] = tokens.as_slice() else {
            return Err(lines.err("malformed activation line"));
        };
        if lines.parse::<usize>(idx)? != k {
            return Err(lines.err(format!("expected activation for layer {k}")));
        }
        let kind: ActivationKind = kind.parse().map_err(|e| lines.err(format!("{e}")))?;
        activations.push(Activation {
            kind,
            shift: lines.parse(shift)?,
            clip_epsilon: lines.parse(eps)?,
        });
    }
    let spec = NetworkSpec::with_activations(input_dim, widths, activations)?;
    let mut layers = Vec::with_capacity(spec.depth());
    for k in 1..=spec.depth() {
        let tokens = lines.keyed("layer")?;
        let [idx, rows, cols] = tokens.as_slice() else {
            return Err(lines.err("malformed layer line"));
        };
        let (idx, rows, cols): (usize, usize, usize) =
            (lines.parse(idx)?, lines.parse(rows)?, lines.parse(cols)?);
        if idx != k || (rows, cols) != spec.layer_shape(k) {
            return Err(lines.err(format!(
                "layer {idx} header {rows}x{cols} does not match spec"
            )));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let line = lines.next_line()?;
            let before = data.len();
            for t in line.split_whitespace() {
                data.push(lines.parse::<f64>(t)?);
            }
            if data.len() - before != cols {
                return Err(lines.err(format!("expected {cols} values")));
            }
        }
        layers.push(Matrix::from_row_slice(rows, cols, &data));
    }
    lines.keyed("end")?;
    let weights = WeightStack::new(&spec, layers)?;
    Ok(Model { spec, weights })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_model() -> Model {
        let spec = NetworkSpec::new(2, vec![3, 1]).unwrap();
        let w1 = Matrix::from_fn(3, 3, |i, j| (i as f64 - 1.3) * (j as f64 + 0.1).powi(3) * 1e-7);
        let w2 = Matrix::from_row_slice(4, 1, &[0.1, -2.5e300, 1.0 / 3.0, 7.0]);
        Model {
            weights: WeightStack::new(&spec, vec![w1, w2]).unwrap(),
            spec,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let m = sample_model();
        let mut buf = Vec::new();
        write_model(&m, &mut buf).unwrap();
        let back = read_model(buf.as_slice()).unwrap();
        assert_eq!(back, m);
        let mut again = Vec::new();
        write_model(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }

    #[test]
    fn header_layout() {
        let mut buf = Vec::new();
        write_model(&sample_model(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("karspace-model 1"));
        assert_eq!(lines.next(), Some("input_dim 2"));
        assert_eq!(lines.next(), Some("widths 3 1"));
        assert_eq!(lines.next(), Some("activation 1 modified_softplus 8e-1 1e-6"));
        assert!(text.ends_with("end\n"));
    }

    #[test]
    fn rejects_corruption() {
        let mut buf = Vec::new();
        write_model(&sample_model(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let bad_version = text.replacen("karspace-model 1", "karspace-model 9", 1);
        assert!(matches!(
            read_model(bad_version.as_bytes()),
            Err(ModelFileError::Version(9))
        ));
        let truncated: String = text.lines().take(8).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            read_model(truncated.as_bytes()),
            Err(ModelFileError::Parse { .. })
        ));
        let bad_float = text.replacen("7e0", "seven", 1);
        assert!(read_model(bad_float.as_bytes()).is_err());
    }
}
