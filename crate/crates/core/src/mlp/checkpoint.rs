//! Text checkpoints.
//!
//! ```text
//! MLPCKPT v1
//! <layer dims, space separated>
//! <layer 0 weights, one output row per line>
//! <layer 0 bias>
//! ...
//! ```
//!
//! Numbers use the shortest exponent form that round-trips an `f64`.

use ndarray::{Array1, Array2};

use super::MlpModel;
use crate::error::{parse, Error, Result};
use crate::textfmt::{join_f64, parse_finite};

pub const CHECKPOINT_MAGIC: &str = "MLPCKPT v1";

pub fn serialize(model: &MlpModel) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(CHECKPOINT_MAGIC);
    out.push('\n');
    let dims: Vec<String> = model.dims().iter().map(usize::to_string).collect();
    out.push_str(&dims.join(" "));
    out.push('\n');
    for (w, b) in model.weights().iter().zip(model.biases()) {
        for row in w.rows() {
            out.push_str(&join_f64(row.iter()));
            out.push('\n');
        }
        out.push_str(&join_f64(b.iter()));
        out.push('\n');
    }
    out.into_bytes()
}

fn parse_row(line: Option<&str>, width: usize, what: &str) -> Result<Vec<f64>> {
    let line = line.ok_or_else(|| parse(format!("checkpoint truncated before {what}")))?;
    let values = parse_finite(line, what)?;
    if values.len() != width {
        return Err(parse(format!("{what} has {} values, expected {width}", values.len())));
    }
    Ok(values)
}

pub fn deserialize(bytes: &[u8]) -> Result<MlpModel> {
    let text = std::str::from_utf8(bytes).map_err(|_| parse("checkpoint is not UTF-8"))?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().trim_end();
    if header != CHECKPOINT_MAGIC {
        return Err(Error::Version { expected: CHECKPOINT_MAGIC.into(), found: header.into() });
    }
    let dims = lines
        .next()
        .ok_or_else(|| parse("checkpoint truncated before layer dims"))?
        .split_ascii_whitespace()
        .map(|tok| tok.parse::<usize>().map_err(|_| parse(format!("bad layer width `{tok}`"))))
        .collect::<Result<Vec<_>>>()?;
    MlpModel::zeros(&dims)?;

    let mut weights = Vec::with_capacity(dims.len() - 1);
    let mut biases = Vec::with_capacity(dims.len() - 1);
    for (l, pair) in dims.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let mut flat = Vec::with_capacity(fan_in * fan_out);
        for r in 0..fan_out {
            flat.extend(parse_row(lines.next(), fan_in, &format!("layer {l} row {r}"))?);
        }
        weights.push(Array2::from_shape_vec((fan_out, fan_in), flat).map_err(|e| parse(e.to_string()))?);
        biases.push(Array1::from(parse_row(lines.next(), fan_out, &format!("layer {l} bias"))?));
    }
    if lines.any(|l| !l.trim().is_empty()) {
        return Err(parse("trailing data after the last layer"));
    }
    MlpModel::from_parts(dims, weights, biases)
}
