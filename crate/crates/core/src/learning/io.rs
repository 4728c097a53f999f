//! Dataset and realization files.
//!
//! Dataset file:
//!
//! ```text
//! RISDATA v1 kind=<kind> ris=<M> groups=<K0> features=<F> targets=<T> samples=<N>
//! mean <F values>
//! std <F values>
//! <index>;<rx x y z>;<F features>;<T targets>;<label indices>
//! ```
//!
//! Realization file:
//!
//! ```text
//! RISREAL v1 ris=<M> elements=<K> samples=<N>
//! <index>;<rx x y z>;<h0 re im>;<h_1>;...;<h_M>;<g_1>;...;<g_M>
//! ```
//!
//! where each link is `re im` pairs per element.
//!
//! Predictor file: a header and the feature scaling, followed by a network
//! checkpoint.
//!
//! ```text
//! RISPRED v1 kind=<kind>
//! mean <F values>
//! std <F values>
//! MLPCKPT v1
//! ...
//! ```
//!
//! Reals are written in the shortest exponent form that round-trips an `f64`.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::dataset::{Dataset, Normalization, Sample};
use super::encode::EncoderKind;
use super::train::Predictor;
use crate::channel::{ChannelRealization, Position3D};
use crate::error::{parse, shape, Error, Result};
use crate::mlp::{deserialize, serialize};
use crate::textfmt::{header_fields, header_value, join_display, join_f64, parse_finite, parse_list};

pub const DATASET_MAGIC: &str = "RISDATA v1";
pub const REALIZATION_MAGIC: &str = "RISREAL v1";
pub const PREDICTOR_MAGIC: &str = "RISPRED v1";

fn next_line<R: BufRead>(lines: &mut std::io::Lines<R>, what: &str) -> Result<String> {
    Ok(lines.next().ok_or_else(|| parse(format!("file truncated before {what}")))??)
}

fn prefixed<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|r| r.strip_prefix(' ').or(if r.is_empty() { Some("") } else { None }))
        .ok_or_else(|| parse(format!("expected `{key}` line")))
}

fn position(field: &str, what: &str) -> Result<Position3D> {
    match parse_finite(field, what)?[..] {
        [x, y, z] => Ok(Position3D::new(x, y, z)),
        _ => Err(parse(format!("{what} must have three coordinates"))),
    }
}

fn read_normalization<R: BufRead>(lines: &mut std::io::Lines<R>, width: Option<usize>) -> Result<Normalization> {
    let mean = parse_finite(prefixed(&next_line(lines, "mean")?, "mean")?, "mean")?;
    let std = parse_finite(prefixed(&next_line(lines, "std")?, "std")?, "std")?;
    if mean.len() != std.len() || width.is_some_and(|w| w != mean.len()) || std.iter().any(|&s| !(s > 0.0)) {
        return Err(parse("normalization vectors do not match the feature width"));
    }
    Ok(Normalization { mean, std })
}

pub fn write_dataset<W: Write>(ds: &Dataset, mut out: W) -> Result<()> {
    writeln!(
        out,
        "{DATASET_MAGIC} kind={} ris={} groups={} features={} targets={} samples={}",
        ds.kind,
        ds.num_ris,
        ds.groups,
        ds.feature_width(),
        ds.target_width(),
        ds.len()
    )?;
    writeln!(out, "mean {}", join_f64(&ds.normalization.mean))?;
    writeln!(out, "std {}", join_f64(&ds.normalization.std))?;
    for s in &ds.samples {
        writeln!(
            out,
            "{};{};{};{};{}",
            s.index,
            join_f64(&s.rx.to_array()),
            join_f64(&s.features),
            join_f64(&s.target),
            join_display(&s.labels)
        )?;
    }
    Ok(())
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<Dataset> {
    let mut lines = input.lines();
    let header = next_line(&mut lines, "header")?;
    let fields = header_fields(&header, DATASET_MAGIC)?;
    let kind: EncoderKind = header_value(&fields, "kind")?;
    let num_ris: usize = header_value(&fields, "ris")?;
    let groups: usize = header_value(&fields, "groups")?;
    let features: usize = header_value(&fields, "features")?;
    let targets: usize = header_value(&fields, "targets")?;
    let count: usize = header_value(&fields, "samples")?;
    if kind.target_width(num_ris, groups) != targets {
        return Err(parse("target width disagrees with kind, ris and groups"));
    }

    let normalization = read_normalization(&mut lines, Some(features))?;

    let mut samples = Vec::with_capacity(count);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(';').collect();
        let [index, rx, feat, target, labels] = parts[..] else {
            return Err(parse(format!("record {} does not have five fields", samples.len())));
        };
        let sample = Sample {
            index: index.trim().parse().map_err(|_| parse(format!("bad sample index `{index}`")))?,
            rx: position(rx, "rx position")?,
            features: parse_finite(feat, "features")?,
            target: parse_finite(target, "targets")?,
            labels: parse_list(labels, "labels")?,
        };
        if sample.features.len() != features || sample.target.len() != targets || sample.labels.len() != targets {
            return Err(shape(format!("record {} has inconsistent widths", sample.index)));
        }
        samples.push(sample);
    }
    if samples.len() != count {
        return Err(parse(format!("header announces {count} samples, file has {}", samples.len())));
    }
    Ok(Dataset { kind, num_ris, groups, samples, normalization })
}

/// One stored realization with its RX position.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationRecord {
    pub index: u64,
    pub rx: Position3D,
    pub realization: ChannelRealization,
}

fn complex_list(v: &[Complex64]) -> String {
    let flat: Vec<f64> = v.iter().flat_map(|c| [c.re, c.im]).collect();
    join_f64(&flat)
}

fn parse_complex(field: &str, what: &str) -> Result<Vec<Complex64>> {
    let flat = parse_finite(field, what)?;
    if flat.len() % 2 != 0 {
        return Err(parse(format!("{what} has an odd number of reals")));
    }
    Ok(flat.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect())
}

pub fn write_realizations<W: Write>(records: &[RealizationRecord], mut out: W) -> Result<()> {
    let (m, k) = records.first().map_or((0, 0), |r| (r.realization.num_ris(), r.realization.h.first().map_or(0, Vec::len)));
    writeln!(out, "{REALIZATION_MAGIC} ris={m} elements={k} samples={}", records.len())?;
    for rec in records {
        let r = &rec.realization;
        if r.num_ris() != m || r.h.iter().chain(&r.g).any(|v| v.len() != k) {
            return Err(shape("all realizations in one file must share M and K"));
        }
        write!(out, "{};{};{}", rec.index, join_f64(&rec.rx.to_array()), complex_list(&[r.h0]))?;
        for link in r.h.iter().chain(&r.g) {
            write!(out, ";{}", complex_list(link))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn read_realizations<R: BufRead>(input: R) -> Result<Vec<RealizationRecord>> {
    let mut lines = input.lines();
    let header = next_line(&mut lines, "header")?;
    let fields = header_fields(&header, REALIZATION_MAGIC)?;
    let m: usize = header_value(&fields, "ris")?;
    let k: usize = header_value(&fields, "elements")?;
    let count: usize = header_value(&fields, "samples")?;
    let mut out = Vec::with_capacity(count);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(';').collect();
        if parts.len() != 3 + 2 * m {
            return Err(parse(format!("realization record has {} fields, expected {}", parts.len(), 3 + 2 * m)));
        }
        let h0 = parse_complex(parts[2], "h0")?;
        if h0.len() != 1 {
            return Err(parse("h0 must be one complex value"));
        }
        let mut links = parts[3..]
            .iter()
            .map(|f| parse_complex(f, "link"))
            .collect::<Result<Vec<_>>>()?;
        if links.iter().any(|l| l.len() != k) {
            return Err(shape("link length differs from the header element count"));
        }
        let g = links.split_off(m);
        out.push(RealizationRecord {
            index: parts[0].trim().parse().map_err(|_| parse(format!("bad index `{}`", parts[0])))?,
            rx: position(parts[1], "rx position")?,
            realization: ChannelRealization { h: links, g, h0: h0[0] },
        });
    }
    if out.len() != count {
        return Err(parse(format!("header announces {count} realizations, file has {}", out.len())));
    }
    Ok(out)
}

pub fn write_predictor<W: Write>(p: &Predictor, mut out: W) -> Result<()> {
    let norm = p.normalization.as_ref().ok_or(Error::MissingNormalization)?;
    writeln!(out, "{PREDICTOR_MAGIC} kind={}", p.kind)?;
    writeln!(out, "mean {}", join_f64(&norm.mean))?;
    writeln!(out, "std {}", join_f64(&norm.std))?;
    out.write_all(&serialize(&p.model))?;
    Ok(())
}

pub fn read_predictor<R: BufRead>(mut input: R) -> Result<Predictor> {
    let mut head = String::new();
    for _ in 0..3 {
        if input.read_line(&mut head)? == 0 {
            return Err(parse("predictor file truncated"));
        }
    }
    let mut lines = head.as_bytes().lines();
    let header = next_line(&mut lines, "header")?;
    let kind: EncoderKind = header_value(&header_fields(&header, PREDICTOR_MAGIC)?, "kind")?;
    let normalization = read_normalization(&mut lines, None)?;
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    let model = deserialize(&rest)?;
    if model.input_dim() != normalization.width() {
        return Err(shape("network input width differs from the feature scaling"));
    }
    Ok(Predictor::new(kind, model, normalization))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dataset_round_trip() {
        let ds = Dataset {
            kind: EncoderKind::ChanInd(1),
            num_ris: 2,
            groups: 2,
            samples: vec![Sample {
                index: 7,
                rx: Position3D::new(18.25, 30.1, 1.0),
                features: vec![0.1, -3.5e-9, 1.0 / 3.0],
                target: vec![1.0, -1.0],
                labels: vec![0, 1],
            }],
            normalization: Normalization { mean: vec![0.0, 1.0, 2.0], std: vec![1.0, 0.5, 1e-3] },
        };
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("RISDATA v1 kind=chan_ind:1 ris=2 groups=2 features=3 targets=2 samples=1\n"));
        assert_eq!(read_dataset(&buf[..]).unwrap(), ds);

        let truncated = text.lines().take(3).collect::<Vec<_>>().join("\n");
        assert!(read_dataset(truncated.as_bytes()).is_err());
    }

    #[test]
    fn predictor_round_trip() {
        let model = crate::mlp::MlpModel::init(&[3, 4, 2], 9).unwrap();
        let norm = Normalization { mean: vec![0.5, -1.0, 2.0], std: vec![1.0, 3.0, 0.25] };
        let p = Predictor::new(EncoderKind::PosInd(2), model, norm);
        let mut buf = Vec::new();
        write_predictor(&p, &mut buf).unwrap();
        assert_eq!(read_predictor(&buf[..]).unwrap(), p);

        let narrow = Predictor::new(p.kind, crate::mlp::MlpModel::init(&[2, 2], 0).unwrap(), p.normalization.clone().unwrap());
        let mut bad = Vec::new();
        write_predictor(&narrow, &mut bad).unwrap();
        assert!(read_predictor(&bad[..]).is_err());
        assert!(read_predictor(&b"RISPRED v1 kind=pos_cen\n"[..]).is_err());
    }

    #[test]
    fn realization_round_trip() {
        let rec = RealizationRecord {
            index: 3,
            rx: Position3D::new(1.0, 2.0, 3.0),
            realization: ChannelRealization {
                h: vec![vec![c(1e-7, -2.5e-8), c(0.0, 1.0)], vec![c(-1.0, 0.0), c(0.5, 0.5)]],
                g: vec![vec![c(3.0, 4.0), c(1e-300, 0.0)], vec![c(0.1, 0.2), c(0.3, 0.4)]],
                h0: c(-7e-5, 1.25e-4),
            },
        };
        let mut buf = Vec::new();
        write_realizations(std::slice::from_ref(&rec), &mut buf).unwrap();
        assert_eq!(read_realizations(&buf[..]).unwrap(), vec![rec]);
    }
}
