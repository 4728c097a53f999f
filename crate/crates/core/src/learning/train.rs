//! Centralized, individual and federated training, plus inference.

use ndarray::Array2;
use rayon::prelude::*;

use super::dataset::{Dataset, Normalization};
use super::encode::{decode_indices, encode_features, EncoderKind, FeatureSpec};
use crate::channel::{ChannelRealization, Position3D};
use crate::error::{domain, shape, Error, Result};
use crate::mlp::{average, to_matrix, train_epoch, MlpModel, OptimizerState, TrainHyper};
use crate::ris::PhaseConfig;

use super::dataset::Problem;

/// Hidden-layer widths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HiddenLayers {
    /// 256/128/16 centralized, 64/32/4 per RIS.
    Table,
    /// `3MK, 3MK/2, MK0` centralized and `3K, 3K/2, K0` per RIS.
    Formula,
    /// Same widths for every network.
    Custom(Vec<usize>),
}

impl HiddenLayers {
    pub fn widths(&self, centralized: bool, num_ris: usize, elements: usize, groups: usize) -> Vec<usize> {
        match self {
            HiddenLayers::Table if centralized => vec![256, 128, 16],
            HiddenLayers::Table => vec![64, 32, 4],
            HiddenLayers::Formula => {
                let m = if centralized { num_ris } else { 1 };
                vec![3 * m * elements, 3 * m * elements / 2, m * groups]
            }
            HiddenLayers::Custom(w) => w.clone(),
        }
    }
}

impl std::fmt::Display for HiddenLayers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HiddenLayers::Table => write!(f, "table"),
            HiddenLayers::Formula => write!(f, "formula"),
            HiddenLayers::Custom(w) => {
                write!(f, "{}", w.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
            }
        }
    }
}

impl std::str::FromStr for HiddenLayers {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "table" => Ok(HiddenLayers::Table),
            "formula" => Ok(HiddenLayers::Formula),
            other => {
                let widths = other
                    .split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::Config(format!("bad hidden layer list `{other}`")))?;
                if widths.is_empty() || widths.contains(&0) {
                    return Err(Error::Config(format!("bad hidden layer list `{other}`")));
                }
                Ok(HiddenLayers::Custom(widths))
            }
        }
    }
}

/// Full layer list `[input, hidden..., output]` for an encoder.
pub fn network_dims(kind: EncoderKind, problem: &Problem, hidden: &HiddenLayers) -> Vec<usize> {
    let (m, k, k0) = (problem.num_ris(), problem.elements(), problem.groups());
    let mut dims = vec![FeatureSpec::new(m, k).width(kind)];
    dims.extend(hidden.widths(kind.is_centralized(), m, k, k0));
    dims.push(kind.target_width(m, k0));
    dims
}

/// Trained networks with their per-epoch training MSE.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub models: Vec<MlpModel>,
    pub loss_curves: Vec<Vec<f64>>,
}

struct Prepared {
    x: Array2<f64>,
    t: Array2<f64>,
}

fn prepare(ds: &Dataset, dims: &[usize]) -> Result<Prepared> {
    if ds.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if dims.first() != Some(&ds.feature_width()) || dims.last() != Some(&ds.target_width()) {
        return Err(shape(format!(
            "network {dims:?} does not fit {} features -> {} targets of {}",
            ds.feature_width(),
            ds.target_width(),
            ds.kind
        )));
    }
    Ok(Prepared { x: to_matrix(&ds.standardized()?, ds.feature_width())?, t: to_matrix(&ds.targets(), ds.target_width())? })
}

/// Trains one network on one dataset for `hyper.epochs` epochs.
pub fn train_model(ds: &Dataset, dims: &[usize], hyper: &TrainHyper) -> Result<(MlpModel, Vec<f64>)> {
    hyper.validate()?;
    let data = prepare(ds, dims)?;
    let mut model = MlpModel::init(dims, hyper.seed)?;
    let mut state = OptimizerState::default();
    let curve = (0..hyper.epochs as u64)
        .map(|e| train_epoch(&mut model, &mut state, data.x.view(), data.t.view(), hyper, e))
        .collect::<Result<Vec<_>>>()?;
    Ok((model, curve))
}

/// CEN: one dataset, one model. IND: one dataset per RIS, one model each.
pub fn train_variant(datasets: &[Dataset], dims: &[usize], hyper: &TrainHyper) -> Result<TrainOutcome> {
    let first = datasets.first().ok_or_else(|| domain("no datasets to train on"))?;
    if first.kind.is_centralized() && datasets.len() != 1 {
        return Err(domain("centralized training takes exactly one dataset"));
    }
    if datasets.iter().any(|d| d.kind.is_centralized() != first.kind.is_centralized()) {
        return Err(domain("cannot mix centralized and per-RIS datasets"));
    }
    let trained = datasets.par_iter().map(|ds| train_model(ds, dims, hyper)).collect::<Result<Vec<_>>>()?;
    let (models, loss_curves) = trained.into_iter().unzip();
    Ok(TrainOutcome { models, loss_curves })
}

/// Federated averaging over the per-RIS datasets. All RISs start from the
/// same initialization; every round each RIS trains `local_epochs` epochs on
/// its own data (keeping its own optimizer state), then every model is
/// replaced by the parameter-wise average.
pub fn train_federated(
    datasets: &[Dataset],
    dims: &[usize],
    rounds: usize,
    local_epochs: usize,
    hyper: &TrainHyper,
) -> Result<TrainOutcome> {
    if datasets.is_empty() {
        return Err(domain("no datasets to train on"));
    }
    if datasets.iter().any(|d| d.kind.is_centralized()) {
        return Err(domain("federated training needs per-RIS datasets"));
    }
    hyper.validate()?;
    let data = datasets.iter().map(|d| prepare(d, dims)).collect::<Result<Vec<_>>>()?;
    let init = MlpModel::init(dims, hyper.seed)?;
    let mut models = vec![init; datasets.len()];
    let mut states = vec![OptimizerState::default(); datasets.len()];
    let mut loss_curves = vec![Vec::with_capacity(rounds * local_epochs); datasets.len()];

    for round in 0..rounds {
        let epochs = models
            .par_iter_mut()
            .zip(states.par_iter_mut())
            .zip(data.par_iter())
            .map(|((model, state), d)| {
                (0..local_epochs)
                    .map(|e| {
                        let epoch = (round * local_epochs + e) as u64;
                        train_epoch(model, state, d.x.view(), d.t.view(), hyper, epoch)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        for (curve, e) in loss_curves.iter_mut().zip(epochs) {
            curve.extend(e);
        }
        let global = average(&models)?;
        models.iter_mut().for_each(|m| *m = global.clone());
    }
    Ok(TrainOutcome { models, loss_curves })
}

/// A trained network together with the feature scaling it was trained under.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    pub kind: EncoderKind,
    pub model: MlpModel,
    pub normalization: Option<Normalization>,
}

impl Predictor {
    pub fn new(kind: EncoderKind, model: MlpModel, normalization: Normalization) -> Self {
        Self { kind, model, normalization: Some(normalization) }
    }

    /// Raw network outputs for a batch of raw feature rows.
    pub fn predict_rows(&self, rows: &[Vec<f64>]) -> Result<Array2<f64>> {
        let norm = self.normalization.as_ref().ok_or(Error::MissingNormalization)?;
        let scaled = rows.iter().map(|r| norm.apply(r)).collect::<Result<Vec<_>>>()?;
        self.model.forward_batch(to_matrix(&scaled, norm.width())?.view())
    }
}

/// One test input: RX position and the realization observed there.
pub type Observation<'a> = (Position3D, &'a ChannelRealization);

/// Phase configurations chosen by a set of predictors: either one centralized
/// network or one network per RIS (assembled RIS-major).
pub fn infer_batch(predictors: &[Predictor], problem: &Problem, inputs: &[Observation<'_>]) -> Result<Vec<PhaseConfig>> {
    let (m, k0) = (problem.num_ris(), problem.groups());
    let centralized = match predictors {
        [p] if p.kind.is_centralized() => true,
        ps if ps.len() == m && ps.iter().enumerate().all(|(i, p)| p.kind.ris() == Some(i)) => false,
        _ => return Err(domain("need one centralized predictor or one per-RIS predictor for every RIS, in order")),
    };
    let mut flat = vec![Vec::with_capacity(m * k0); inputs.len()];
    for p in predictors {
        let rows = inputs
            .iter()
            .map(|(rx, r)| encode_features(p.kind, &problem.scene, *rx, r, problem.log_floor))
            .collect::<Result<Vec<_>>>()?;
        let out = p.predict_rows(&rows)?;
        let width = if centralized { m * k0 } else { k0 };
        if out.ncols() != width {
            return Err(shape(format!("{} network outputs {} values, expected {width}", p.kind, out.ncols())));
        }
        for (dst, row) in flat.iter_mut().zip(out.rows()) {
            dst.extend(decode_indices(row.as_slice().expect("standard layout")));
        }
    }
    flat.iter().map(|f| PhaseConfig::from_flat(f, m, k0)).collect()
}

/// Configuration for a single observation.
pub fn infer_configs(predictors: &[Predictor], problem: &Problem, rx: Position3D, r: &ChannelRealization) -> Result<PhaseConfig> {
    Ok(infer_batch(predictors, problem, &[(rx, r)])?.remove(0))
}
