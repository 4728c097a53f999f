//! Rate statistics: normalized means, outage quantiles and empirical CDFs.

use crate::error::{domain, Error, Result};

use super::experiment::Approach;

/// `P(rate <= t)` for every threshold (right-continuous empirical CDF).
pub fn outage_cdf(rates: &[f64], thresholds: &[f64]) -> Result<Vec<f64>> {
    if rates.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if rates.iter().chain(thresholds).any(|v| v.is_nan()) {
        return Err(domain("NaN in outage computation"));
    }
    let mut sorted = rates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(thresholds.iter().map(|&t| sorted.partition_point(|&r| r <= t) as f64 / n).collect())
}

/// Smallest sample `r` with `P(rate <= r) >= p`.
pub fn outage_rate(rates: &[f64], p: f64) -> Result<f64> {
    if rates.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(domain("outage probability must be in [0, 1]"));
    }
    let mut sorted = rates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = ((p * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[k - 1])
}

/// `n` evenly spaced thresholds spanning `[lo, hi]`.
pub fn thresholds(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Outcome of one approach over the test split.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproachMetrics {
    pub approach: Approach,
    /// Per-realization rates in test-split order.
    pub rates: Vec<f64>,
    pub mean_rate: f64,
    /// Mean rate over the exhaustive mean rate.
    pub normalized: f64,
    /// Per-realization rate over the exhaustive rate (1 where both are 0).
    pub ratios: Vec<f64>,
    /// 5% outage rate.
    pub outage_5: f64,
    /// CDF at the shared thresholds.
    pub cdf: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// Sample indices of the test split.
    pub indices: Vec<u64>,
    pub thresholds: Vec<f64>,
    pub approaches: Vec<ApproachMetrics>,
}

impl Metrics {
    /// Aggregates per-approach rate samples. `rates` must include
    /// [`Approach::Exhaustive`], which serves as the normalizing reference.
    pub fn from_rates(indices: Vec<u64>, rates: Vec<(Approach, Vec<f64>)>, cdf_points: usize) -> Result<Self> {
        let reference = rates
            .iter()
            .find(|(a, _)| *a == Approach::Exhaustive)
            .map(|(_, r)| r.clone())
            .ok_or_else(|| domain("metrics need the exhaustive rates as reference"))?;
        if reference.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if rates.iter().any(|(_, r)| r.len() != reference.len()) || indices.len() != reference.len() {
            return Err(domain("every approach must be evaluated on the same realizations"));
        }
        let all = rates.iter().flat_map(|(_, r)| r.iter().copied());
        let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let thresholds = thresholds(lo, hi, cdf_points);
        let ref_mean = mean(&reference);
        let approaches = rates
            .into_iter()
            .map(|(approach, rates)| {
                let ratios = rates
                    .iter()
                    .zip(&reference)
                    .map(|(&r, &e)| if e == 0.0 { if r == 0.0 { 1.0 } else { f64::INFINITY } } else { r / e })
                    .collect();
                let mean_rate = mean(&rates);
                let normalized = if approach == Approach::Exhaustive { 1.0 } else { mean_rate / ref_mean };
                Ok(ApproachMetrics {
                    approach,
                    mean_rate,
                    normalized,
                    ratios,
                    outage_5: outage_rate(&rates, 0.05)?,
                    cdf: outage_cdf(&rates, &thresholds)?,
                    rates,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { indices, thresholds, approaches })
    }

    pub fn get(&self, approach: Approach) -> Option<&ApproachMetrics> {
        self.approaches.iter().find(|m| m.approach == approach)
    }

    /// Rate at which an approach's empirical CDF reaches one half.
    pub fn median(&self, approach: Approach) -> Option<f64> {
        self.get(approach).map(|m| outage_rate(&m.rates, 0.5).expect("non-empty rates"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cdf_edges() {
        let r = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(outage_cdf(&r, &[0.5, 1.0, 2.5, 4.0, 9.0]).unwrap(), vec![0.0, 0.25, 0.5, 1.0, 1.0]);
        assert_eq!(outage_cdf(&[2.0; 5], &[1.999, 2.0]).unwrap(), vec![0.0, 1.0]);
        assert!(outage_cdf(&[], &[1.0]).is_err());
    }

    #[test]
    fn quantiles() {
        let r: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(outage_rate(&r, 0.05).unwrap(), 5.0);
        assert_eq!(outage_rate(&r, 0.5).unwrap(), 50.0);
        assert_eq!(outage_rate(&r, 0.0).unwrap(), 1.0);
        assert_eq!(outage_rate(&r, 1.0).unwrap(), 100.0);
    }

    #[test]
    fn threshold_grid_hits_both_ends() {
        let t = thresholds(0.3, 7.1, 11);
        assert_eq!((t[0], t[10], t.len()), (0.3, 7.1, 11));
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn exhaustive_normalizes_to_one() {
        let m = Metrics::from_rates(
            vec![0, 1, 2],
            vec![(Approach::Exhaustive, vec![2.0, 4.0, 6.0]), (Approach::Random, vec![1.0, 4.0, 4.0])],
            5,
        )
        .unwrap();
        assert_eq!(m.get(Approach::Exhaustive).unwrap().normalized, 1.0);
        assert_eq!(m.get(Approach::Random).unwrap().normalized, 0.75);
        assert_eq!(m.get(Approach::Random).unwrap().ratios, vec![0.5, 1.0, 4.0 / 6.0]);
        assert_eq!(m.thresholds, vec![1.0, 2.25, 3.5, 4.75, 6.0]);
        assert!(Metrics::from_rates(vec![0], vec![(Approach::Random, vec![1.0])], 5).is_err());
    }

    proptest! {
        #[test]
        fn cdf_is_a_nondecreasing_probability(
            rates in prop::collection::vec(0.0..20.0f64, 1..60),
            mut ts in prop::collection::vec(-1.0..21.0f64, 1..30),
        ) {
            ts.sort_by(f64::total_cmp);
            let cdf = outage_cdf(&rates, &ts).unwrap();
            prop_assert!(cdf.iter().all(|p| (0.0..=1.0).contains(p)));
            prop_assert!(cdf.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn pointwise_dominance_orders_cdfs(pairs in prop::collection::vec((0.0..10.0f64, 0.0..1.0f64), 1..50)) {
            let best: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let worse: Vec<f64> = pairs.iter().map(|p| p.0 * p.1).collect();
            let m = Metrics::from_rates(
                (0..best.len() as u64).collect(),
                vec![(Approach::Exhaustive, best), (Approach::Random, worse)],
                40,
            ).unwrap();
            let (e, r) = (m.get(Approach::Exhaustive).unwrap(), m.get(Approach::Random).unwrap());
            prop_assert!(e.cdf.iter().zip(&r.cdf).all(|(a, b)| a <= b));
            prop_assert!(r.normalized <= 1.0);
        }
    }
}
