//! Running every approach on one setup.

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::metrics::Metrics;
use crate::channel::stream::{tag, StreamKey};
use crate::error::{domain, Error, Result};
use crate::learning::{
    build_dataset, draw_sample, generate_labeled, infer_batch, label, network_dims, train_federated, train_variant, Dataset, EncoderKind,
    LabeledRealization, Observation, Predictor, Problem, RxGrid, Split,
};
use crate::learning::io::RealizationRecord;
use crate::oracle::{no_ris_rate, random_config};
use crate::ris::{achievable_rate, PhaseConfig};

/// A phase-configuration policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Approach {
    Exhaustive,
    Random,
    NoRis,
    PosCen,
    PosInd,
    ChanCen,
    ChanInd,
    PosFl,
    ChanFl,
}

impl Approach {
    pub const ALL: [Approach; 9] = [
        Approach::Exhaustive,
        Approach::Random,
        Approach::NoRis,
        Approach::PosCen,
        Approach::PosInd,
        Approach::ChanCen,
        Approach::ChanInd,
        Approach::PosFl,
        Approach::ChanFl,
    ];
    pub const BASELINES: [Approach; 3] = [Approach::Exhaustive, Approach::Random, Approach::NoRis];
    pub const LEARNED: [Approach; 6] =
        [Approach::PosCen, Approach::PosInd, Approach::ChanCen, Approach::ChanInd, Approach::PosFl, Approach::ChanFl];

    pub fn name(self) -> &'static str {
        match self {
            Approach::Exhaustive => "exhaustive",
            Approach::Random => "random",
            Approach::NoRis => "no_ris",
            Approach::PosCen => "pos_cen",
            Approach::PosInd => "pos_ind",
            Approach::ChanCen => "chan_cen",
            Approach::ChanInd => "chan_ind",
            Approach::PosFl => "pos_fl",
            Approach::ChanFl => "chan_fl",
        }
    }

    pub fn is_learned(self) -> bool {
        !Self::BASELINES.contains(&self)
    }

    pub fn is_federated(self) -> bool {
        matches!(self, Approach::PosFl | Approach::ChanFl)
    }

    /// Encoders of the networks behind a learned approach, one per network.
    pub fn encoders(self, num_ris: usize) -> Vec<EncoderKind> {
        match self {
            Approach::PosCen => vec![EncoderKind::PosCen],
            Approach::ChanCen => vec![EncoderKind::ChanCen],
            Approach::PosInd | Approach::PosFl => (0..num_ris).map(EncoderKind::PosInd).collect(),
            Approach::ChanInd | Approach::ChanFl => (0..num_ris).map(EncoderKind::ChanInd).collect(),
            _ => Vec::new(),
        }
    }

    /// Comma-separated list; `all` expands to every approach. The result is
    /// deduplicated and in canonical order.
    pub fn parse_list(s: &str) -> Result<Vec<Approach>> {
        let mut out = Vec::new();
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if tok == "all" {
                out.extend(Self::ALL);
            } else {
                out.push(tok.parse()?);
            }
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl std::fmt::Display for Approach {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Approach {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown approach `{s}`")))
    }
}

/// Networks trained for one learned approach.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedApproach {
    pub approach: Approach,
    pub predictors: Vec<Predictor>,
    /// Per-epoch training MSE of each network.
    pub loss_curves: Vec<Vec<f64>>,
}

/// A configured setup ready to generate data, train and evaluate.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub problem: Problem,
    pub grid: RxGrid,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let mut problem = config.setup.problem(config.clusters.clone())?;
        problem.oracle_cap = config.oracle_budget;
        problem.log_floor = config.log_floor;
        let grid = RxGrid::new(config.grid_center(), config.grid_width, config.grid_points)?;
        Ok(Self { config, problem, grid })
    }

    pub fn split_size(&self, split: Split) -> usize {
        match split {
            Split::Train => self.config.n_train,
            Split::Test => self.config.n_test,
        }
    }

    /// Draws and labels one split.
    pub fn labeled(&self, split: Split) -> Result<Vec<LabeledRealization>> {
        generate_labeled(&self.problem, &self.grid, split, self.split_size(split), self.config.seed)
    }

    /// Draws one split without labeling it.
    pub fn draw(&self, split: Split) -> Result<Vec<RealizationRecord>> {
        (0..self.split_size(split) as u64)
            .into_par_iter()
            .map(|i| {
                let (rx, realization) = draw_sample(&self.problem, &self.grid, split, self.config.seed, i)?;
                Ok(RealizationRecord { index: i, rx, realization })
            })
            .collect()
    }

    /// Labels stored realizations with both oracles.
    pub fn label_records(&self, records: Vec<RealizationRecord>) -> Result<Vec<LabeledRealization>> {
        records.into_par_iter().map(|r| label(&self.problem, r.index, r.rx, r.realization)).collect()
    }

    /// Training sets of a learned approach.
    pub fn datasets(&self, approach: Approach, train: &[LabeledRealization]) -> Result<Vec<Dataset>> {
        approach.encoders(self.problem.num_ris()).into_iter().map(|k| build_dataset(&self.problem, k, train)).collect()
    }

    /// Trains a learned approach on prepared datasets.
    pub fn train_on(&self, approach: Approach, datasets: &[Dataset]) -> Result<TrainedApproach> {
        let kinds = approach.encoders(self.problem.num_ris());
        if kinds.is_empty() {
            return Err(domain(format!("{approach} is not a learned approach")));
        }
        if datasets.iter().map(|d| d.kind).ne(kinds.iter().copied()) {
            return Err(domain(format!("{approach} needs datasets for {kinds:?}")));
        }
        let dims = network_dims(kinds[0], &self.problem, &self.config.hidden);
        let outcome = if approach.is_federated() {
            let c = &self.config;
            train_federated(datasets, &dims, c.fl_rounds, c.fl_local_epochs, &c.hyper)?
        } else {
            train_variant(datasets, &dims, &self.config.hyper)?
        };
        let predictors = outcome
            .models
            .into_iter()
            .zip(datasets)
            .map(|(model, ds)| Predictor::new(ds.kind, model, ds.normalization.clone()))
            .collect();
        Ok(TrainedApproach { approach, predictors, loss_curves: outcome.loss_curves })
    }

    pub fn train(&self, approach: Approach, train: &[LabeledRealization]) -> Result<TrainedApproach> {
        self.train_on(approach, &self.datasets(approach, train)?)
    }

    /// Random baseline configuration of test sample `index`.
    pub fn random_config(&self, index: u64) -> PhaseConfig {
        let mut rng = StreamKey::new(self.config.seed, Split::Test.stream_index(index)).rng(tag::RANDOM_CONFIG);
        random_config(self.problem.num_ris(), self.problem.groups(), &self.problem.codebook, &mut rng)
    }

    /// Configuration an approach picks for every test realization, or `None`
    /// for the no-RIS baseline.
    pub fn configs(&self, approach: Approach, test: &[LabeledRealization], trained: Option<&TrainedApproach>) -> Result<Option<Vec<PhaseConfig>>> {
        Ok(Some(match approach {
            Approach::NoRis => return Ok(None),
            Approach::Exhaustive => test.iter().map(|s| s.joint.clone()).collect(),
            Approach::Random => test.iter().map(|s| self.random_config(s.index)).collect(),
            learned => {
                let t = trained
                    .filter(|t| t.approach == learned)
                    .ok_or_else(|| domain(format!("{learned} has not been trained")))?;
                let inputs: Vec<Observation> = test.iter().map(|s| (s.rx, &s.realization)).collect();
                infer_batch(&t.predictors, &self.problem, &inputs)?
            }
        }))
    }

    /// Per-realization rates of one approach on a labeled test split.
    pub fn rates(&self, approach: Approach, test: &[LabeledRealization], trained: Option<&TrainedApproach>) -> Result<Vec<f64>> {
        match (approach, self.configs(approach, test, trained)?) {
            (Approach::Exhaustive, _) => Ok(test.iter().map(|s| s.joint_rate).collect()),
            (_, None) => Ok(test.iter().map(|s| no_ris_rate(&s.realization, self.problem.budget)).collect()),
            (_, Some(configs)) => {
                let p = &self.problem;
                test.par_iter()
                    .zip(&configs)
                    .map(|(s, c)| achievable_rate(&s.realization, c, &p.maps, &p.codebook, p.budget))
                    .collect()
            }
        }
    }

    /// Evaluates the baselines plus every trained approach.
    pub fn evaluate(&self, test: &[LabeledRealization], trained: &[TrainedApproach]) -> Result<Metrics> {
        let mut approaches: Vec<Approach> = Approach::BASELINES.into_iter().chain(trained.iter().map(|t| t.approach)).collect();
        approaches.sort();
        if approaches.windows(2).any(|w| w[0] == w[1]) {
            return Err(domain("each approach may be evaluated once"));
        }
        let rates = approaches
            .into_iter()
            .map(|a| Ok((a, self.rates(a, test, trained.iter().find(|t| t.approach == a))?)))
            .collect::<Result<Vec<_>>>()?;
        Metrics::from_rates(test.iter().map(|s| s.index).collect(), rates, self.config.cdf_points)
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: Metrics,
    pub trained: Vec<TrainedApproach>,
}

/// Generates both splits, trains every requested learned approach and
/// evaluates it next to the exhaustive, random and no-RIS baselines.
pub fn run_experiment(config: &ExperimentConfig, approaches: &[Approach]) -> Result<RunOutput> {
    let exp = Experiment::new(config.clone())?;
    let mut learned: Vec<Approach> = approaches.iter().copied().filter(|a| a.is_learned()).collect();
    learned.sort();
    learned.dedup();
    let train = if learned.is_empty() { Vec::new() } else { exp.labeled(Split::Train)? };
    let trained = learned.iter().map(|&a| exp.train(a, &train)).collect::<Result<Vec<_>>>()?;
    drop(train);
    let test = exp.labeled(Split::Test)?;
    let metrics = exp.evaluate(&test, &trained)?;
    Ok(RunOutput { metrics, trained })
}
