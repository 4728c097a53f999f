//! Labeled realizations, datasets, and feature standardization.

use rayon::prelude::*;
use rand::Rng;

use super::encode::{encode_features, encode_label, EncoderKind, DEFAULT_LOG_FLOOR};
use crate::channel::stream::{tag, StreamKey};
use crate::channel::{sample_realization, ChannelRealization, ClusterConfig, Position3D, Scene};
use crate::error::{domain, shape, Result};
use crate::oracle::{exhaustive_joint, exhaustive_per_ris, DEFAULT_BUDGET};
use crate::ris::{Codebook, GroupMap, LinkBudget, PhaseConfig};

/// Everything needed to draw and label realizations.
#[derive(Debug, Clone)]
pub struct Problem {
    /// Scene with the nominal RX position; per-sample RX positions replace it.
    pub scene: Scene,
    pub clusters: ClusterConfig,
    /// One group map per RIS.
    pub maps: Vec<GroupMap>,
    pub codebook: Codebook,
    pub budget: LinkBudget,
    /// Candidate cap for exhaustive searches.
    pub oracle_cap: u64,
    pub log_floor: f64,
}

impl Problem {
    pub fn new(scene: Scene, clusters: ClusterConfig, maps: Vec<GroupMap>, codebook: Codebook, budget: LinkBudget) -> Result<Self> {
        scene.validate()?;
        clusters.validate()?;
        budget.validate()?;
        if maps.len() != scene.num_ris() {
            return Err(shape(format!("{} group maps for {} RISs", maps.len(), scene.num_ris())));
        }
        for (map, ris) in maps.iter().zip(&scene.ris) {
            if map.num_elements() != ris.geometry.len() {
                return Err(shape("group map size differs from the RIS element count"));
            }
        }
        Ok(Self { scene, clusters, maps, codebook, budget, oracle_cap: DEFAULT_BUDGET, log_floor: DEFAULT_LOG_FLOOR })
    }

    pub fn num_ris(&self) -> usize {
        self.scene.num_ris()
    }

    /// Groups per RIS K0 (taken from the first RIS).
    pub fn groups(&self) -> usize {
        self.maps[0].num_groups()
    }

    /// Elements per RIS K (taken from the first RIS).
    pub fn elements(&self) -> usize {
        self.maps[0].num_elements()
    }
}

/// Square grid of candidate RX positions at fixed height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RxGrid {
    pub center: Position3D,
    /// Side length of the square, meters.
    pub width: f64,
    pub points_per_side: usize,
}

impl RxGrid {
    pub fn new(center: Position3D, width: f64, points_per_side: usize) -> Result<Self> {
        if !(width >= 0.0) || points_per_side == 0 {
            return Err(domain("grid needs a non-negative width and at least one point per side"));
        }
        Ok(Self { center, width, points_per_side })
    }

    /// Lattice points, x-major.
    pub fn points(&self) -> Vec<Position3D> {
        let n = self.points_per_side;
        let offset = |i: usize| if n == 1 { 0.0 } else { -self.width / 2.0 + self.width * i as f64 / (n - 1) as f64 };
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| Position3D::new(self.center.x + offset(i), self.center.y + offset(j), self.center.z))
            .collect()
    }

    /// Uniform position inside the square.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Position3D {
        let half = self.width / 2.0;
        let dx = -half + self.width * rng.random::<f64>();
        let dy = -half + self.width * rng.random::<f64>();
        Position3D::new(self.center.x + dx, self.center.y + dy, self.center.z)
    }
}

/// Training samples cycle through the lattice; test samples are uniform in the square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    /// Stream index of sample `i`; the two splits never share a stream.
    pub fn stream_index(self, i: u64) -> u64 {
        match self {
            Split::Train => i,
            Split::Test => i | (1 << 63),
        }
    }
}

/// A realization with its RX position and oracle labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRealization {
    pub index: u64,
    pub rx: Position3D,
    pub realization: ChannelRealization,
    /// Joint optimum including the direct link.
    pub joint: PhaseConfig,
    /// Rate of `joint`.
    pub joint_rate: f64,
    /// Per-RIS optimum of each reflected link alone.
    pub per_ris: Vec<Vec<usize>>,
}

/// RX position of sample `i` in `split`.
pub fn rx_position(grid: &RxGrid, split: Split, seed: u64, i: u64) -> Position3D {
    match split {
        Split::Train => {
            let pts = grid.points();
            pts[(i % pts.len() as u64) as usize]
        }
        Split::Test => grid.sample(&mut StreamKey::new(seed, split.stream_index(i)).rng(tag::RX_POSITION)),
    }
}

/// Draws the realization of sample `i` without labeling it.
pub fn draw_sample(problem: &Problem, grid: &RxGrid, split: Split, seed: u64, i: u64) -> Result<(Position3D, ChannelRealization)> {
    let rx = rx_position(grid, split, seed, i);
    let scene = problem.scene.with_rx(rx);
    let realization = sample_realization(&scene, &problem.clusters, StreamKey::new(seed, split.stream_index(i)))?;
    Ok((rx, realization))
}

/// Runs both oracles on one realization.
pub fn label(problem: &Problem, index: u64, rx: Position3D, realization: ChannelRealization) -> Result<LabeledRealization> {
    let joint = exhaustive_joint(&realization, &problem.maps, &problem.codebook, problem.budget, problem.oracle_cap)?;
    let per_ris = problem
        .maps
        .iter()
        .enumerate()
        .map(|(m, map)| {
            exhaustive_per_ris(&realization.h[m], &realization.g[m], map, &problem.codebook, problem.budget, problem.oracle_cap)
                .map(|r| r.config.ris(0).to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LabeledRealization { index, rx, realization, joint: joint.config, joint_rate: joint.rate, per_ris })
}

/// Draws and labels `n` samples of `split`. Samples are independent and
/// processed in parallel; the output is ordered by sample index.
pub fn generate_labeled(problem: &Problem, grid: &RxGrid, split: Split, n: usize, seed: u64) -> Result<Vec<LabeledRealization>> {
    if n == 0 {
        return Err(domain("need at least one sample"));
    }
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let (rx, r) = draw_sample(problem, grid, split, seed, i)?;
            label(problem, i, rx, r)
        })
        .collect()
}

/// Per-feature standardization statistics from a training split.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub mean: Vec<f64>,
    /// Standard deviations; features without spread carry 1 so they are only centred.
    pub std: Vec<f64>,
}

impl Normalization {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| domain("cannot fit a normalization on no samples"))?;
        let width = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; width];
        for r in rows {
            if r.len() != width {
                return Err(shape("feature rows differ in width"));
            }
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; width];
        for r in rows {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .zip(&mean)
            .map(|(s, m)| {
                let sd = (s / n).sqrt();
                // spreads at rounding level are treated as constant features
                if sd > 1e-12 * m.abs().max(1e-300) { sd } else { 1.0 }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn width(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.width() {
            return Err(shape(format!("feature width {} != normalization width {}", x.len(), self.width())));
        }
        Ok(x.iter().zip(&self.mean).zip(&self.std).map(|((v, m), s)| (v - m) / s).collect())
    }

    pub fn invert(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.width() {
            return Err(shape(format!("feature width {} != normalization width {}", z.len(), self.width())));
        }
        Ok(z.iter().zip(&self.mean).zip(&self.std).map(|((v, m), s)| v * s + m).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub index: u64,
    pub rx: Position3D,
    /// Raw (unstandardized) features.
    pub features: Vec<f64>,
    /// Labels in {-1, +1}.
    pub target: Vec<f64>,
    /// Codebook indices behind `target`, RIS-major.
    pub labels: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub kind: EncoderKind,
    pub num_ris: usize,
    pub groups: usize,
    pub samples: Vec<Sample>,
    pub normalization: Normalization,
}

impl Dataset {
    pub fn feature_width(&self) -> usize {
        self.normalization.width()
    }

    pub fn target_width(&self) -> usize {
        self.kind.target_width(self.num_ris, self.groups)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Standardized feature rows.
    pub fn standardized(&self) -> Result<Vec<Vec<f64>>> {
        self.samples.iter().map(|s| self.normalization.apply(&s.features)).collect()
    }

    pub fn targets(&self) -> Vec<Vec<f64>> {
        self.samples.iter().map(|s| s.target.clone()).collect()
    }
}

/// Encodes labeled realizations for one encoder. Centralized encoders use the
/// joint labels; per-RIS encoders use that RIS's own labels. The normalization
/// is fitted on the produced features.
pub fn build_dataset(problem: &Problem, kind: EncoderKind, labeled: &[LabeledRealization]) -> Result<Dataset> {
    if let Some(m) = kind.ris() {
        if m >= problem.num_ris() {
            return Err(domain(format!("{kind}: RIS index out of range")));
        }
    }
    let samples = labeled
        .par_iter()
        .map(|s| {
            let labels = match kind.ris() {
                None => s.joint.to_flat(),
                Some(m) => s.per_ris[m].clone(),
            };
            Ok(Sample {
                index: s.index,
                rx: s.rx,
                features: encode_features(kind, &problem.scene, s.rx, &s.realization, problem.log_floor)?,
                target: encode_label(&labels, &problem.codebook)?,
                labels,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| s.features.clone()).collect();
    let normalization = Normalization::fit(&rows)?;
    Ok(Dataset { kind, num_ris: problem.num_ris(), groups: problem.groups(), samples, normalization })
}

/// Draws, labels and encodes `n` samples in one go.
pub fn generate_dataset(problem: &Problem, grid: &RxGrid, split: Split, n: usize, kind: EncoderKind, seed: u64) -> Result<Dataset> {
    let labeled = generate_labeled(problem, grid, split, n, seed)?;
    build_dataset(problem, kind, &labeled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_points_are_three_by_three_at_two_meter_spacing() {
        let grid = RxGrid::new(Position3D::new(20.0, 30.0, 1.0), 4.0, 3).unwrap();
        let pts = grid.points();
        assert_eq!(pts.len(), 9);
        let xs: Vec<f64> = pts.iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![18.0, 18.0, 18.0, 20.0, 20.0, 20.0, 22.0, 22.0, 22.0]);
        assert!(pts.iter().all(|p| p.z == 1.0 && [28.0, 30.0, 32.0].contains(&p.y)));
    }

    #[test]
    fn uniform_positions_stay_in_square() {
        let grid = RxGrid::new(Position3D::new(10.0, 30.0, 1.0), 4.0, 3).unwrap();
        for i in 0..500 {
            let p = rx_position(&grid, Split::Test, 1, i);
            assert!((8.0..=12.0).contains(&p.x) && (28.0..=32.0).contains(&p.y));
        }
        assert_eq!(rx_position(&grid, Split::Train, 1, 10), grid.points()[1]);
    }

    #[test]
    fn constant_features_only_centred() {
        let rows = vec![vec![5.0, 1.0], vec![5.0, 3.0]];
        let n = Normalization::fit(&rows).unwrap();
        assert_eq!(n.std, vec![1.0, 1.0]);
        assert_eq!(n.mean, vec![5.0, 2.0]);
        assert_eq!(n.apply(&[5.0, 3.0]).unwrap(), vec![0.0, 1.0]);
    }

    proptest! {
        #[test]
        fn normalization_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e3..1e3f64, 5), 2..20)) {
            let n = Normalization::fit(&rows).unwrap();
            for r in &rows {
                let back = n.invert(&n.apply(r).unwrap()).unwrap();
                for (a, b) in back.iter().zip(r) {
                    prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
                }
            }
        }
    }
}
