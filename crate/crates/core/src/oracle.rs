//! Reference phase-configuration policies: joint and per-RIS exhaustive search,
//! uniformly random configurations, and the direct-link-only baseline.
//!
//! The exhaustive searches never touch K-length vectors per candidate. For
//! each RIS `m` and group `i` the partial gain `sum_{k in group i} g_m[k] h_m[k]`
//! is formed once; a candidate's gain is then a codebook-weighted sum of those
//! partials plus `h_0`. Candidates are swept in RIS-major lexicographic order by
//! splitting the digits into a high and a low half and combining two tables of
//! precomputed half-sums.
//!
//! Selection is two-staged so that the winner agrees bit-for-bit with a naive
//! enumerator: the sweep keeps every candidate whose power gain lies within a
//! rounding margin of the best one, and those few survivors are re-scored with
//! the full per-element rate formula. The largest re-scored rate wins; exact
//! ties go to the lexicographically smallest index vector.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::ChannelRealization;
use crate::error::{shape, Error, Result};
use crate::ris::{achievable_rate, cascaded_gain, expand_one, per_ris_rate, Codebook, GroupMap, LinkBudget, PhaseConfig};

/// Default cap on the number of candidates an exhaustive search may visit.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// Relative margin (in units of the coherent power bound) for stage-one survivors.
const SURVIVOR_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub config: PhaseConfig,
    /// Rate of `config`, recomputed with the full formula.
    pub rate: f64,
    pub gain: Complex64,
}

/// Number of candidates `(2^q)^digits`, or a refusal when above `cap`.
pub fn search_space(cb: &Codebook, digits: usize, cap: u64) -> Result<u64> {
    let size = (cb.len() as u128).checked_pow(digits as u32).unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(Error::BudgetExceeded { candidates: size, budget: cap });
    }
    Ok(size as u64)
}

fn group_partials(g: &[Complex64], h: &[Complex64], map: &GroupMap) -> Result<Vec<Complex64>> {
    if g.len() != map.num_elements() || h.len() != map.num_elements() {
        return Err(shape(format!(
            "link lengths g = {}, h = {} do not match K = {}",
            g.len(),
            h.len(),
            map.num_elements()
        )));
    }
    let mut partials = vec![Complex64::new(0.0, 0.0); map.num_groups()];
    for (k, &grp) in map.assignment().iter().enumerate() {
        partials[grp] += g[k] * h[k];
    }
    Ok(partials)
}

/// All `b^len` sums `offset + sum_i cb[d_i] * partials[i]`, lexicographic in `d`.
fn half_table(partials: &[Complex64], cb: &Codebook, offset: Complex64) -> Vec<Complex64> {
    let mut table = vec![offset];
    for &p in partials {
        let weighted: Vec<Complex64> = cb.entries().iter().map(|&e| e * p).collect();
        table = table.iter().flat_map(|&s| weighted.iter().map(move |&w| s + w)).collect();
    }
    table
}

/// Flat lexicographic candidate numbers whose power gain is within the
/// rounding margin of the maximum.
fn survivors(partials: &[Complex64], offset: Complex64, cb: &Codebook, scale: f64) -> Vec<u64> {
    let split = partials.len() / 2;
    let high = half_table(&partials[..split], cb, Complex64::new(0.0, 0.0));
    let low = half_table(&partials[split..], cb, offset);

    let mut best = f64::NEG_INFINITY;
    for &a in &high {
        for &c in &low {
            best = best.max((a + c).norm_sqr());
        }
    }
    let threshold = best - SURVIVOR_MARGIN * scale;
    let stride = low.len() as u64;
    let mut out = Vec::new();
    for (i, &a) in high.iter().enumerate() {
        for (j, &c) in low.iter().enumerate() {
            if (a + c).norm_sqr() >= threshold {
                out.push(i as u64 * stride + j as u64);
            }
        }
    }
    out
}

fn digits_of(mut n: u64, radix: u64, len: usize) -> Vec<usize> {
    let mut d = vec![0usize; len];
    for slot in d.iter_mut().rev() {
        *slot = (n % radix) as usize;
        n /= radix;
    }
    d
}

/// Picks the best survivor under the exact scorer; survivors arrive in
/// lexicographic order so a strict comparison keeps the smallest on ties.
fn rescore<F>(candidates: &[u64], radix: u64, len: usize, mut score: F) -> Result<(Vec<usize>, f64)>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    let mut best: Option<(Vec<usize>, f64)> = None;
    for &n in candidates {
        let digits = digits_of(n, radix, len);
        let rate = score(&digits)?;
        if best.as_ref().is_none_or(|(_, b)| rate > *b) {
            best = Some((digits, rate));
        }
    }
    Ok(best.expect("the maximum itself always survives"))
}

/// Solves the joint discrete phase problem over all RISs, direct link included.
pub fn exhaustive_joint(
    r: &ChannelRealization,
    maps: &[GroupMap],
    cb: &Codebook,
    budget: LinkBudget,
    cap: u64,
) -> Result<OracleResult> {
    budget.validate()?;
    if r.h.len() != maps.len() || r.g.len() != maps.len() {
        return Err(shape(format!("realization has {} RISs, {} group maps given", r.h.len(), maps.len())));
    }
    let digits: usize = maps.iter().map(GroupMap::num_groups).sum();
    search_space(cb, digits, cap)?;

    let mut partials = Vec::with_capacity(digits);
    let mut coherent = r.h0.norm();
    for (m, map) in maps.iter().enumerate() {
        partials.extend(group_partials(&r.g[m], &r.h[m], map)?);
        coherent += r.g[m].iter().zip(&r.h[m]).map(|(g, h)| (g * h).norm()).sum::<f64>();
    }
    let found = survivors(&partials, r.h0, cb, coherent * coherent);

    let groups: Vec<usize> = maps.iter().map(GroupMap::num_groups).collect();
    let to_config = |flat: &[usize]| {
        let mut rows = Vec::with_capacity(groups.len());
        let mut at = 0;
        for &k0 in &groups {
            rows.push(flat[at..at + k0].to_vec());
            at += k0;
        }
        PhaseConfig::new(rows)
    };
    let (flat, rate) = rescore(&found, cb.len() as u64, digits, |flat| {
        achievable_rate(r, &to_config(flat), maps, cb, budget)
    })?;
    let config = to_config(&flat);
    let gain = cascaded_gain(r, &config, maps, cb)?;
    Ok(OracleResult { config, rate, gain })
}

/// Best configuration of a single RIS for its own reflected link (no direct path).
pub fn exhaustive_per_ris(
    h: &[Complex64],
    g: &[Complex64],
    map: &GroupMap,
    cb: &Codebook,
    budget: LinkBudget,
    cap: u64,
) -> Result<OracleResult> {
    budget.validate()?;
    let digits = map.num_groups();
    search_space(cb, digits, cap)?;
    let partials = group_partials(g, h, map)?;
    let coherent: f64 = g.iter().zip(h).map(|(a, b)| (a * b).norm()).sum();
    let zero = Complex64::new(0.0, 0.0);
    let found = survivors(&partials, zero, cb, coherent * coherent);
    let (indices, rate) = rescore(&found, cb.len() as u64, digits, |idx| per_ris_rate(h, g, idx, map, cb, budget))?;
    let phi = expand_one(&indices, map, cb)?;
    let gain = g.iter().zip(&phi).zip(h).fold(zero, |acc, ((g, p), h)| acc + g * p * h);
    Ok(OracleResult { config: PhaseConfig::new(vec![indices]), rate, gain })
}

/// Independent uniform codebook index for every group of every RIS.
pub fn random_config<R: Rng + ?Sized>(num_ris: usize, num_groups: usize, cb: &Codebook, rng: &mut R) -> PhaseConfig {
    PhaseConfig::new(
        (0..num_ris)
            .map(|_| (0..num_groups).map(|_| rng.random_range(0..cb.len())).collect())
            .collect(),
    )
}

/// Rate with the RISs removed: only the direct link remains.
pub fn no_ris_rate(r: &ChannelRealization, budget: LinkBudget) -> f64 {
    budget.rate_from_power_gain(r.h0.norm_sqr())
}
