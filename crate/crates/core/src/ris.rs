//! Phase codebooks, element grouping, cascaded gain and achievable rate.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::error::{domain, shape, Result};

/// The `2^q` feasible reflection coefficients `exp(j 2^(1-q) pi f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    bits: u32,
    entries: Vec<Complex64>,
}

impl Codebook {
    pub fn new(bits: u32) -> Result<Self> {
        if bits == 0 || bits > 16 {
            return Err(domain(format!("phase resolution must be in 1..=16 bits, got {bits}")));
        }
        let size = 1usize << bits;
        let entries = (0..size)
            .map(|f| {
                // quarter turns are snapped so that 0, pi/2, pi, 3pi/2 are exact
                if (4 * f) % size == 0 {
                    match 4 * f / size {
                        0 => Complex64::new(1.0, 0.0),
                        1 => Complex64::new(0.0, 1.0),
                        2 => Complex64::new(-1.0, 0.0),
                        _ => Complex64::new(0.0, -1.0),
                    }
                } else {
                    Complex64::from_polar(1.0, 2.0 * PI * f as f64 / size as f64)
                }
            })
            .collect();
        Ok(Self { bits, entries })
    }

    /// Phase resolution q in bits.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn entry(&self, index: usize) -> Result<Complex64> {
        self.entries
            .get(index)
            .copied()
            .ok_or_else(|| shape(format!("codebook index {index} out of range for q = {}", self.bits)))
    }

    /// Phase of entry `index` in radians.
    pub fn phase(&self, index: usize) -> f64 {
        2.0 * PI * index as f64 / self.entries.len() as f64
    }
}

/// Assignment of every RIS element to one of `K0` phase-sharing groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupMap {
    assignment: Vec<usize>,
    num_groups: usize,
}

impl GroupMap {
    pub fn from_assignment(assignment: Vec<usize>, num_groups: usize) -> Result<Self> {
        if num_groups == 0 || assignment.is_empty() {
            return Err(domain("group map needs at least one element and one group"));
        }
        let mut seen = vec![false; num_groups];
        for &g in &assignment {
            *seen.get_mut(g).ok_or_else(|| domain(format!("group id {g} >= K0 = {num_groups}")))? = true;
        }
        if seen.contains(&false) {
            return Err(domain("every group must contain at least one element"));
        }
        Ok(Self { assignment, num_groups })
    }

    /// Consecutive index blocks of size `K / K0`.
    pub fn contiguous(num_elements: usize, num_groups: usize) -> Result<Self> {
        if num_groups == 0 || num_elements % num_groups != 0 {
            return Err(domain(format!("K = {num_elements} is not divisible by K0 = {num_groups}")));
        }
        let size = num_elements / num_groups;
        Self::from_assignment((0..num_elements).map(|k| k / size).collect(), num_groups)
    }

    /// Rectangular tiles over a `rows x cols` row-major grid, numbered in
    /// row-major tile order. The tiling uses the squarest tiles that divide the
    /// grid; an 8x8 grid with four groups yields four 4x4 quadrants.
    pub fn tiles(rows: usize, cols: usize, num_groups: usize) -> Result<Self> {
        let k = rows * cols;
        if num_groups == 0 || k % num_groups != 0 {
            return Err(domain(format!("K = {k} is not divisible by K0 = {num_groups}")));
        }
        let mut best: Option<(usize, usize, f64)> = None;
        for tr in (1..=num_groups).filter(|a| num_groups % a == 0) {
            let tc = num_groups / tr;
            if rows % tr != 0 || cols % tc != 0 {
                continue;
            }
            let skew = ((rows / tr) as f64 / (cols / tc) as f64).ln().abs();
            if best.is_none_or(|(_, _, s)| skew < s) {
                best = Some((tr, tc, skew));
            }
        }
        let (tile_rows, tile_cols, _) =
            best.ok_or_else(|| domain(format!("a {rows}x{cols} grid cannot be tiled into {num_groups} groups")))?;
        let (h, w) = (rows / tile_rows, cols / tile_cols);
        let assignment = (0..rows)
            .flat_map(|p| (0..cols).map(move |q| (p / h) * tile_cols + q / w))
            .collect();
        Self::from_assignment(assignment, num_groups)
    }

    /// Group id of every element.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Number of elements K.
    pub fn num_elements(&self) -> usize {
        self.assignment.len()
    }

    /// Number of groups K0.
    pub fn num_groups(&self) -> usize {
        self.num_groups
    }

    /// First element of each group.
    pub fn representatives(&self) -> Vec<usize> {
        (0..self.num_groups)
            .map(|g| self.assignment.iter().position(|&a| a == g).expect("groups are non-empty"))
            .collect()
    }
}

/// Group-level codebook indices, one vector of length `K0` per RIS.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhaseConfig {
    indices: Vec<Vec<usize>>,
}

impl PhaseConfig {
    pub fn new(indices: Vec<Vec<usize>>) -> Self {
        Self { indices }
    }

    pub fn zeros(num_ris: usize, num_groups: usize) -> Self {
        Self::new(vec![vec![0; num_groups]; num_ris])
    }

    /// Rebuilds a config from its RIS-major flat form.
    pub fn from_flat(flat: &[usize], num_ris: usize, num_groups: usize) -> Result<Self> {
        if flat.len() != num_ris * num_groups {
            return Err(shape(format!(
                "flat config has {} entries, expected M * K0 = {}",
                flat.len(),
                num_ris * num_groups
            )));
        }
        if num_groups == 0 {
            return Ok(Self::new(vec![Vec::new(); num_ris]));
        }
        Ok(Self::new(flat.chunks(num_groups).map(<[usize]>::to_vec).collect()))
    }

    /// RIS-major flat list of indices.
    pub fn to_flat(&self) -> Vec<usize> {
        self.indices.iter().flatten().copied().collect()
    }

    pub fn per_ris(&self) -> &[Vec<usize>] {
        &self.indices
    }

    pub fn ris(&self, m: usize) -> &[usize] {
        &self.indices[m]
    }

    pub fn num_ris(&self) -> usize {
        self.indices.len()
    }

    /// True when every index addresses an entry of `cb`.
    pub fn is_feasible(&self, cb: &Codebook) -> bool {
        self.indices.iter().flatten().all(|&i| i < cb.len())
    }
}

/// Expands the group indices of one RIS into per-element coefficients.
pub fn expand_one(indices: &[usize], map: &GroupMap, cb: &Codebook) -> Result<Vec<Complex64>> {
    if indices.len() != map.num_groups() {
        return Err(shape(format!("{} group indices for a map with K0 = {}", indices.len(), map.num_groups())));
    }
    map.assignment().iter().map(|&g| cb.entry(indices[g])).collect()
}

/// Per-RIS coefficient vectors `phi_m` for a whole configuration.
pub fn expand(cfg: &PhaseConfig, maps: &[GroupMap], cb: &Codebook) -> Result<Vec<Vec<Complex64>>> {
    if cfg.num_ris() != maps.len() {
        return Err(shape(format!("config covers {} RISs but {} group maps were given", cfg.num_ris(), maps.len())));
    }
    cfg.per_ris().iter().zip(maps).map(|(idx, map)| expand_one(idx, map, cb)).collect()
}

fn reflected_sum(acc: &mut Complex64, g: &[Complex64], phi: &[Complex64], h: &[Complex64]) -> Result<()> {
    if g.len() != phi.len() || h.len() != phi.len() {
        return Err(shape(format!("link lengths g = {}, h = {}, phi = {}", g.len(), h.len(), phi.len())));
    }
    for k in 0..phi.len() {
        *acc += g[k] * phi[k] * h[k];
    }
    Ok(())
}

/// `sum_m g_m diag(phi_m) h_m + h_0`.
pub fn cascaded_gain(r: &ChannelRealization, cfg: &PhaseConfig, maps: &[GroupMap], cb: &Codebook) -> Result<Complex64> {
    if r.h.len() != maps.len() || r.g.len() != maps.len() {
        return Err(shape(format!("realization has {} RISs, {} group maps given", r.h.len(), maps.len())));
    }
    let phis = expand(cfg, maps, cb)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..phis.len() {
        reflected_sum(&mut acc, &r.g[m], &phis[m], &r.h[m])?;
    }
    Ok(acc + r.h0)
}

/// Transmit power and noise power, both in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub power: f64,
    pub noise: f64,
}

impl LinkBudget {
    pub fn new(power: f64, noise: f64) -> Result<Self> {
        let budget = Self { power, noise };
        budget.validate()?;
        Ok(budget)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power > 0.0 && self.noise > 0.0) {
            return Err(domain("transmit and noise power must be positive"));
        }
        Ok(())
    }

    pub fn snr(&self) -> f64 {
        self.power / self.noise
    }

    /// `log2(1 + P / sigma^2 * |gain|^2)` from a squared gain magnitude.
    pub fn rate_from_power_gain(&self, power_gain: f64) -> f64 {
        (self.snr() * power_gain).ln_1p() / std::f64::consts::LN_2
    }
}

/// Achievable rate in bits per channel use.
pub fn achievable_rate(
    r: &ChannelRealization,
    cfg: &PhaseConfig,
    maps: &[GroupMap],
    cb: &Codebook,
    budget: LinkBudget,
) -> Result<f64> {
    budget.validate()?;
    Ok(budget.rate_from_power_gain(cascaded_gain(r, cfg, maps, cb)?.norm_sqr()))
}

/// Rate through a single RIS with the direct link ignored.
pub fn per_ris_rate(
    h: &[Complex64],
    g: &[Complex64],
    indices: &[usize],
    map: &GroupMap,
    cb: &Codebook,
    budget: LinkBudget,
) -> Result<f64> {
    budget.validate()?;
    let phi = expand_one(indices, map, cb)?;
    let mut acc = Complex64::new(0.0, 0.0);
    reflected_sum(&mut acc, g, &phi, h)?;
    Ok(budget.rate_from_power_gain(acc.norm_sqr()))
}
