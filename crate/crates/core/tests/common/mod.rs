//! Helpers shared by the integration tests.
#![allow(dead_code)]

use multiris_core::channel::{complex_gaussian, ChannelRealization};
use multiris_core::ris::{achievable_rate, Codebook, GroupMap, LinkBudget, PhaseConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub r: ChannelRealization,
    pub maps: Vec<GroupMap>,
    pub cb: Codebook,
    pub budget: LinkBudget,
}

/// Random small instance: M <= 2, K <= 8, K0 <= 3, q <= 2.
pub fn instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=2);
    let k = rng.random_range(1..=8);
    let k0 = rng.random_range(1..=k.min(3));
    let cb = Codebook::new(rng.random_range(1..=2)).unwrap();
    let maps = (0..m)
        .map(|_| {
            let mut a: Vec<usize> = (0..k).map(|i| if i < k0 { i } else { rng.random_range(0..k0) }).collect();
            a.shuffle(&mut rng);
            GroupMap::from_assignment(a, k0).unwrap()
        })
        .collect();
    let scale = 10f64.powi(rng.random_range(-4..=0));
    let link = |rng: &mut ChaCha8Rng| (0..k).map(|_| complex_gaussian(rng, scale)).collect::<Vec<_>>();
    let h = (0..m).map(|_| link(&mut rng)).collect();
    let g = (0..m).map(|_| link(&mut rng)).collect();
    let h0 = if rng.random_bool(0.2) { Default::default() } else { complex_gaussian(&mut rng, scale * scale) };
    let budget = LinkBudget::new(1.0, 10f64.powi(rng.random_range(-12..=-2))).unwrap();
    Instance { r: ChannelRealization { h, g, h0 }, maps, cb, budget }
}

/// Every configuration in lexicographic order, RIS-major.
pub fn all_configs(num_ris: usize, groups: usize, levels: usize) -> Vec<PhaseConfig> {
    let digits = num_ris * groups;
    let total = levels.pow(digits as u32);
    (0..total)
        .map(|mut code| {
            let mut flat = vec![0; digits];
            for d in flat.iter_mut().rev() {
                *d = code % levels;
                code /= levels;
            }
            PhaseConfig::from_flat(&flat, num_ris, groups).unwrap()
        })
        .collect()
}

/// Full-recompute search; the first strict maximum in lexicographic order wins.
pub fn naive_joint(inst: &Instance) -> (PhaseConfig, f64) {
    let mut best: Option<(PhaseConfig, f64)> = None;
    for cfg in all_configs(inst.maps.len(), inst.maps[0].num_groups(), inst.cb.len()) {
        let rate = achievable_rate(&inst.r, &cfg, &inst.maps, &inst.cb, inst.budget).unwrap();
        if best.as_ref().is_none_or(|(_, b)| rate > *b) {
            best = Some((cfg, rate));
        }
    }
    best.unwrap()
}

