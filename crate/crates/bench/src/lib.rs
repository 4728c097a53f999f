//! Fixtures shared by the benchmarks.

use multiris_core::harness::{Experiment, ExperimentConfig, SetupSpec};
use multiris_core::learning::{LabeledRealization, Split};
use multiris_core::{ChannelRealization, MlpModel};

/// Experiment for a preset setup with `n` samples per split.
pub fn experiment(setup: u8, n: usize) -> Experiment {
    let mut cfg = ExperimentConfig::for_setup(SetupSpec::preset(setup).expect("preset setup"));
    cfg.n_train = n;
    cfg.n_test = n;
    Experiment::new(cfg).expect("valid preset")
}

/// `n` unlabeled test realizations of a preset setup.
pub fn realizations(setup: u8, n: usize) -> (Experiment, Vec<ChannelRealization>) {
    let exp = experiment(setup, n);
    let r = exp.draw(Split::Test).expect("draw").into_iter().map(|r| r.realization).collect();
    (exp, r)
}

/// `n` labeled training realizations of a preset setup.
pub fn labeled(setup: u8, n: usize) -> (Experiment, Vec<LabeledRealization>) {
    let exp = experiment(setup, n);
    let l = exp.labeled(Split::Train).expect("label");
    (exp, l)
}

/// Deterministic input batch of `rows` × `width` values in [-1, 1).
pub fn batch(rows: usize, width: usize) -> Vec<Vec<f64>> {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    (0..rows)
        .map(|_| {
            (0..width)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    (state >> 11) as f64 / (1u64 << 52) as f64 - 1.0
                })
                .collect()
        })
        .collect()
}

pub fn model(dims: &[usize]) -> MlpModel {
    MlpModel::init(dims, 7).expect("valid dims")
}
