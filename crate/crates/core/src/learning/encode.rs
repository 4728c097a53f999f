//! Feature and label encoders.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::channel::{ChannelRealization, Position3D, Scene};
use crate::error::{domain, parse, shape, Error, Result};
use crate::ris::{Codebook, PhaseConfig};

/// Default floor for `log10 |c|` of a zero coefficient.
pub const DEFAULT_LOG_FLOOR: f64 = -20.0;

/// Which inputs a network sees and which RISs it decides for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncoderKind {
    /// Positions of every RIS element relative to TX and RX, all RISs.
    PosCen,
    /// Relative positions for one RIS.
    PosInd(usize),
    /// Magnitude/phase of every channel coefficient, all RISs.
    ChanCen,
    /// Channel coefficients of one RIS plus the direct link.
    ChanInd(usize),
}

impl EncoderKind {
    pub fn is_centralized(self) -> bool {
        matches!(self, EncoderKind::PosCen | EncoderKind::ChanCen)
    }

    pub fn is_position(self) -> bool {
        matches!(self, EncoderKind::PosCen | EncoderKind::PosInd(_))
    }

    /// RIS index for the per-RIS encoders.
    pub fn ris(self) -> Option<usize> {
        match self {
            EncoderKind::PosInd(m) | EncoderKind::ChanInd(m) => Some(m),
            _ => None,
        }
    }

    /// Input width for `num_ris` RISs of `elements` elements each.
    pub fn feature_width(self, num_ris: usize, elements: usize) -> usize {
        FeatureSpec::new(num_ris, elements).width(self)
    }

    /// Output width: `M K0` when centralized, `K0` otherwise.
    pub fn target_width(self, num_ris: usize, groups: usize) -> usize {
        if self.is_centralized() {
            num_ris * groups
        } else {
            groups
        }
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncoderKind::PosCen => write!(f, "pos_cen"),
            EncoderKind::PosInd(m) => write!(f, "pos_ind:{m}"),
            EncoderKind::ChanCen => write!(f, "chan_cen"),
            EncoderKind::ChanInd(m) => write!(f, "chan_ind:{m}"),
        }
    }
}

impl FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, ris) = match s.split_once(':') {
            Some((n, m)) => (n, Some(m.parse::<usize>().map_err(|_| parse(format!("bad RIS index in `{s}`")))?)),
            None => (s, None),
        };
        match (name, ris) {
            ("pos_cen", None) => Ok(EncoderKind::PosCen),
            ("chan_cen", None) => Ok(EncoderKind::ChanCen),
            ("pos_ind", Some(m)) => Ok(EncoderKind::PosInd(m)),
            ("chan_ind", Some(m)) => Ok(EncoderKind::ChanInd(m)),
            _ => Err(parse(format!("unknown encoder kind `{s}`"))),
        }
    }
}

/// Input widths implied by the scene dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSpec {
    pub num_ris: usize,
    pub elements: usize,
}

impl FeatureSpec {
    pub fn new(num_ris: usize, elements: usize) -> Self {
        Self { num_ris, elements }
    }

    pub fn width(&self, kind: EncoderKind) -> usize {
        let (m, k) = (self.num_ris, self.elements);
        match kind {
            EncoderKind::PosCen => 3 * (2 * m * k + 1),
            EncoderKind::PosInd(_) => 3 * (2 * k + 1),
            EncoderKind::ChanCen => 2 * (2 * m * k) + 2,
            EncoderKind::ChanInd(_) => 2 * (2 * k) + 2,
        }
    }
}

fn check_ris(kind: EncoderKind, num_ris: usize) -> Result<()> {
    match kind.ris() {
        Some(m) if m >= num_ris => Err(domain(format!("{kind}: RIS index out of range (M = {num_ris})"))),
        _ => Ok(()),
    }
}

/// Relative positions: for each element of each covered RIS, `TX - element`
/// then `RX - element`; finally `RX - TX`.
pub fn encode_position(scene: &Scene, rx: Position3D, kind: EncoderKind) -> Result<Vec<f64>> {
    let covered: Vec<usize> = match kind {
        EncoderKind::PosCen => (0..scene.num_ris()).collect(),
        EncoderKind::PosInd(m) => vec![m],
        _ => return Err(domain(format!("{kind} is not a position encoder"))),
    };
    check_ris(kind, scene.num_ris())?;
    let wavelength = scene.wavelength();
    let mut out = Vec::new();
    for m in covered {
        let ris = &scene.ris[m];
        for e in ris.geometry.element_positions(ris.position, wavelength) {
            out.extend((scene.tx - e).to_array());
            out.extend((rx - e).to_array());
        }
    }
    out.extend((rx - scene.tx).to_array());
    Ok(out)
}

/// `(log10 |c|, arg(c) / pi)` with the log-magnitude clamped at `floor`.
pub fn coefficient_pair(c: num_complex::Complex64, floor: f64) -> [f64; 2] {
    let mag = c.norm();
    let log = if mag > 0.0 { mag.log10().max(floor) } else { floor };
    [log, c.arg() / PI]
}

/// Channel features: per covered RIS the `h_m` coefficients then the `g_m`
/// coefficients, then the direct link.
pub fn encode_channel(r: &ChannelRealization, kind: EncoderKind, floor: f64) -> Result<Vec<f64>> {
    let covered: Vec<usize> = match kind {
        EncoderKind::ChanCen => (0..r.num_ris()).collect(),
        EncoderKind::ChanInd(m) => vec![m],
        _ => return Err(domain(format!("{kind} is not a channel encoder"))),
    };
    check_ris(kind, r.num_ris())?;
    let mut out = Vec::new();
    for m in covered {
        for &c in r.h[m].iter().chain(&r.g[m]) {
            out.extend(coefficient_pair(c, floor));
        }
    }
    out.extend(coefficient_pair(r.h0, floor));
    Ok(out)
}

/// Features for either encoder family.
pub fn encode_features(
    kind: EncoderKind,
    scene: &Scene,
    rx: Position3D,
    r: &ChannelRealization,
    floor: f64,
) -> Result<Vec<f64>> {
    if kind.is_position() {
        encode_position(scene, rx, kind)
    } else {
        encode_channel(r, kind, floor)
    }
}

/// One-bit labels: phase 0 maps to +1, phase pi to -1.
pub fn encode_label(indices: &[usize], cb: &Codebook) -> Result<Vec<f64>> {
    if cb.bits() != 1 {
        return Err(Error::UnsupportedResolution(cb.bits()));
    }
    indices
        .iter()
        .map(|&i| match i {
            0 => Ok(1.0),
            1 => Ok(-1.0),
            _ => Err(shape(format!("index {i} outside the one-bit codebook"))),
        })
        .collect()
}

/// Sign decision: `y >= 0` selects index 0, `y < 0` index 1.
pub fn decode_indices(y: &[f64]) -> Vec<usize> {
    y.iter().map(|&v| if v >= 0.0 { 0 } else { 1 }).collect()
}

/// Decodes a network output of width `num_ris * groups` into a configuration.
pub fn decode_output(y: &[f64], num_ris: usize, groups: usize) -> Result<PhaseConfig> {
    if y.len() != num_ris * groups {
        return Err(shape(format!("output width {} != M * K0 = {}", y.len(), num_ris * groups)));
    }
    PhaseConfig::from_flat(&decode_indices(y), num_ris, groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::fixtures::scene;
    use num_complex::Complex64;

    #[test]
    fn table_one_widths() {
        let spec = FeatureSpec::new(4, 64);
        assert_eq!(spec.width(EncoderKind::PosCen), 1539);
        assert_eq!(spec.width(EncoderKind::PosInd(0)), 387);
        assert_eq!(spec.width(EncoderKind::ChanCen), 1026);
        assert_eq!(spec.width(EncoderKind::ChanInd(3)), 258);
    }

    #[test]
    fn position_widths_follow_formula() {
        for (m, r, c) in [(1, 1, 1), (2, 2, 2), (3, 2, 4), (4, 8, 8)] {
            let s = scene(m, r, c);
            let k = r * c;
            assert_eq!(encode_position(&s, s.rx, EncoderKind::PosCen).unwrap().len(), 3 * (2 * m * k + 1));
            assert_eq!(encode_position(&s, s.rx, EncoderKind::PosInd(m - 1)).unwrap().len(), 3 * (2 * k + 1));
        }
    }

    #[test]
    fn coincident_tx_gives_zero_displacement() {
        let mut s = scene(1, 1, 1);
        s.tx = s.ris[0].position;
        let f = encode_position(&s, s.rx, EncoderKind::PosInd(0)).unwrap();
        assert_eq!(&f[..3], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_ris_centralized_equals_individual() {
        let s = scene(1, 2, 2);
        let rx = Position3D::new(18.5, 31.0, 1.0);
        assert_eq!(
            encode_position(&s, rx, EncoderKind::PosCen).unwrap(),
            encode_position(&s, rx, EncoderKind::PosInd(0)).unwrap()
        );
    }

    #[test]
    fn ind_position_requires_valid_ris() {
        let s = scene(2, 2, 2);
        assert!(encode_position(&s, s.rx, EncoderKind::PosInd(2)).is_err());
        assert!(encode_position(&s, s.rx, EncoderKind::ChanCen).is_err());
    }

    #[test]
    fn coefficient_pairs() {
        assert_eq!(coefficient_pair(Complex64::new(1.0, 0.0), -20.0), [0.0, 0.0]);
        assert_eq!(coefficient_pair(Complex64::new(-1.0, 0.0), -20.0), [0.0, 1.0]);
        assert_eq!(coefficient_pair(Complex64::new(0.0, 0.0), -20.0), [-20.0, 0.0]);
        assert_eq!(coefficient_pair(Complex64::new(1e-30, 0.0), -20.0)[0], -20.0);
    }

    #[test]
    fn channel_widths_and_order() {
        let z = Complex64::new(0.0, 0.0);
        let r = ChannelRealization {
            h: vec![vec![Complex64::new(10.0, 0.0), z], vec![z, z]],
            g: vec![vec![Complex64::new(-1.0, 0.0), z], vec![z, z]],
            h0: Complex64::new(0.0, 100.0),
        };
        let cen = encode_channel(&r, EncoderKind::ChanCen, -20.0).unwrap();
        assert_eq!(cen.len(), 2 * (2 * 2 * 2) + 2);
        assert_eq!(&cen[..2], &[1.0, 0.0]);
        assert_eq!(&cen[4..6], &[0.0, 1.0]);
        assert_eq!(&cen[cen.len() - 2..], &[2.0, 0.5]);
        let ind = encode_channel(&r, EncoderKind::ChanInd(0), -20.0).unwrap();
        assert_eq!(ind.len(), 2 * (2 * 2) + 2);
        assert_eq!(&ind[..], &[&cen[..8], &cen[cen.len() - 2..]].concat()[..]);
    }

    #[test]
    fn label_mapping_and_round_trip() {
        let cb = Codebook::new(1).unwrap();
        assert_eq!(encode_label(&[0, 1, 0, 1], &cb).unwrap(), vec![1.0, -1.0, 1.0, -1.0]);
        assert_eq!(encode_label(&[0; 4], &cb).unwrap(), vec![1.0; 4]);
        assert!(matches!(encode_label(&[0], &Codebook::new(2).unwrap()), Err(Error::UnsupportedResolution(2))));

        let cfg = PhaseConfig::new(vec![vec![0, 1], vec![1, 1]]);
        let y = encode_label(&cfg.to_flat(), &cb).unwrap();
        assert_eq!(decode_output(&y, 2, 2).unwrap(), cfg);
    }

    #[test]
    fn decode_sign_rule() {
        assert_eq!(decode_output(&[0.7, -0.2], 1, 2).unwrap().to_flat(), vec![0, 1]);
        assert_eq!(decode_output(&[0.0], 1, 1).unwrap().to_flat(), vec![0]);
        assert_eq!(decode_output(&[-0.0], 1, 1).unwrap().to_flat(), vec![0]);
        assert!(decode_output(&[0.1, 0.2, 0.3], 2, 2).is_err());
    }

    #[test]
    fn kind_names_round_trip() {
        for k in [EncoderKind::PosCen, EncoderKind::PosInd(3), EncoderKind::ChanCen, EncoderKind::ChanInd(0)] {
            assert_eq!(k.to_string().parse::<EncoderKind>().unwrap(), k);
        }
        assert!("pos_ind".parse::<EncoderKind>().is_err());
        assert!("chan_cen:1".parse::<EncoderKind>().is_err());
    }
}
