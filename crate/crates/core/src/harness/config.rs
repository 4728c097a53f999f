//! Flat `key=value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. A `setup` key loads a
//! preset first; every other key then overrides a single field, whatever its
//! position in the file. `setup=custom` requires the geometry keys `d_h`,
//! `x1`, `y1`, `x2`, `y2` and `wall`. Unknown or repeated keys are rejected.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use super::setup::{SetupId, SetupSpec};
use crate::channel::{ClusterConfig, Position3D, RadiationPattern};
use crate::error::{Error, Result};
use crate::learning::{HiddenLayers, DEFAULT_LOG_FLOOR};
use crate::mlp::{Optimizer, TrainHyper};
use crate::oracle::DEFAULT_BUDGET;

/// Everything that determines a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub setup: SetupSpec,
    pub clusters: ClusterConfig,
    pub hyper: TrainHyper,
    /// Seed for data generation and the random baseline.
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub fl_rounds: usize,
    pub fl_local_epochs: usize,
    pub hidden: HiddenLayers,
    pub oracle_budget: u64,
    /// Centre of the RX square; `None` follows the RX position of the setup.
    pub grid_center: Option<Position3D>,
    pub grid_width: f64,
    pub grid_points: usize,
    pub log_floor: f64,
    pub cdf_points: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::for_setup(SetupSpec::preset(1).expect("setup 1 exists"))
    }
}

const CUSTOM_KEYS: [&str; 6] = ["d_h", "x1", "y1", "x2", "y2", "wall"];

pub const KEYS: &[&str] = &[
    "setup",
    "d_h",
    "x1",
    "y1",
    "x2",
    "y2",
    "wall",
    "wall_loss_db",
    "ris_rows",
    "ris_cols",
    "element_spacing",
    "groups",
    "phase_bits",
    "tx_power",
    "noise_dbm",
    "carrier_frequency",
    "pathloss_exponent",
    "radiation_pattern",
    "rays_per_cluster",
    "azimuth_center_min",
    "azimuth_center_max",
    "elevation_center_min",
    "elevation_center_max",
    "intra_cluster_spread",
    "los_probability",
    "learning_rate",
    "epochs",
    "batch_size",
    "lambda",
    "optimizer",
    "adam_beta1",
    "adam_beta2",
    "adam_epsilon",
    "train_seed",
    "seed",
    "n_train",
    "n_test",
    "fl_rounds",
    "fl_local_epochs",
    "nn_dims",
    "oracle_budget",
    "grid_center",
    "grid_width",
    "grid_points",
    "log_floor",
    "cdf_points",
];

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| Error::Config(format!("bad value for `{key}`: `{raw}`")))
}

fn list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',').map(|t| value(key, t)).collect()
}

fn join<T: Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn pattern_text(p: RadiationPattern) -> String {
    match p {
        RadiationPattern::Isotropic => "isotropic".into(),
        RadiationPattern::CosinePower(n) => format!("cos:{n}"),
    }
}

fn parse_pattern(raw: &str) -> Result<RadiationPattern> {
    match raw.trim() {
        "isotropic" => Ok(RadiationPattern::Isotropic),
        other => match other.strip_prefix("cos:") {
            Some(n) => Ok(RadiationPattern::CosinePower(value("radiation_pattern", n)?)),
            None => Err(Error::Config(format!("bad radiation pattern `{other}` (isotropic or cos:<n>)"))),
        },
    }
}

impl ExperimentConfig {
    pub fn for_setup(setup: SetupSpec) -> Self {
        Self {
            setup,
            clusters: ClusterConfig::default(),
            hyper: TrainHyper::default(),
            seed: 1,
            n_train: 5000,
            n_test: 5000,
            fl_rounds: 20,
            fl_local_epochs: 10,
            hidden: HiddenLayers::Table,
            oracle_budget: DEFAULT_BUDGET,
            grid_center: None,
            grid_width: 4.0,
            grid_points: 3,
            log_floor: DEFAULT_LOG_FLOOR,
            cdf_points: 101,
        }
    }

    /// Parses a config file.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[])
    }

    /// Parses a config file, then applies `overrides` (which may repeat file
    /// keys and win over them). A `setup` override reloads the preset before
    /// any other key is applied.
    pub fn parse_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut pairs = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, found `{line}`", n + 1)))?;
            let k = k.trim().to_string();
            if pairs.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: key `{k}` repeated", n + 1)));
            }
        }
        for (k, v) in overrides {
            pairs.insert(k.clone(), v.clone());
        }
        Self::from_pairs(&pairs)
    }

    fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        if let Some(k) = pairs.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
        let mut cfg = match pairs.get("setup").map(|s| s.parse::<SetupId>()).transpose()? {
            None => Self::default(),
            Some(SetupId::Preset(id)) => Self::for_setup(SetupSpec::preset(id)?),
            Some(SetupId::Custom) => {
                if let Some(missing) = CUSTOM_KEYS.iter().find(|k| !pairs.contains_key(**k)) {
                    return Err(Error::Config(format!("custom setup is missing `{missing}`")));
                }
                let mut c = Self::default();
                c.setup.id = SetupId::Custom;
                c
            }
        };
        if let Some(v) = pairs.get("optimizer") {
            cfg.set("optimizer", v)?;
        }
        for (k, v) in pairs.iter().filter(|(k, _)| !matches!(k.as_str(), "setup" | "optimizer")) {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one field from its text form. Setting `setup` only relabels the
    /// spec; use [`ExperimentConfig::parse`] to load a preset.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        let s = &mut self.setup;
        let c = &mut self.clusters;
        let h = &mut self.hyper;
        match key {
            "setup" => s.id = value(key, raw)?,
            "d_h" => s.d_h = value(key, raw)?,
            "x1" => s.x1 = value(key, raw)?,
            "y1" => s.y1 = value(key, raw)?,
            "x2" => s.x2 = value(key, raw)?,
            "y2" => s.y2 = value(key, raw)?,
            "wall" => s.wall = value(key, raw)?,
            "wall_loss_db" => s.wall_loss_db = value(key, raw)?,
            "ris_rows" => s.ris_rows = value(key, raw)?,
            "ris_cols" => s.ris_cols = value(key, raw)?,
            "element_spacing" => s.spacing_wavelengths = value(key, raw)?,
            "groups" => s.groups = value(key, raw)?,
            "phase_bits" => s.phase_bits = value(key, raw)?,
            "tx_power" => s.tx_power = value(key, raw)?,
            "noise_dbm" => s.noise_dbm = value(key, raw)?,
            "carrier_frequency" => s.carrier_frequency = value(key, raw)?,
            "pathloss_exponent" => s.pathloss_exponent = value(key, raw)?,
            "radiation_pattern" => s.pattern = parse_pattern(raw)?,
            "rays_per_cluster" => c.rays_per_cluster = list(key, raw)?,
            "azimuth_center_min" => c.azimuth_center_range.0 = value(key, raw)?,
            "azimuth_center_max" => c.azimuth_center_range.1 = value(key, raw)?,
            "elevation_center_min" => c.elevation_center_range.0 = value(key, raw)?,
            "elevation_center_max" => c.elevation_center_range.1 = value(key, raw)?,
            "intra_cluster_spread" => c.intra_cluster_spread = value(key, raw)?,
            "los_probability" => c.los_probability = value(key, raw)?,
            "learning_rate" => h.learning_rate = value(key, raw)?,
            "epochs" => h.epochs = value(key, raw)?,
            "batch_size" => h.batch_size = value(key, raw)?,
            "lambda" => h.lambda = value(key, raw)?,
            "optimizer" => {
                h.optimizer = match raw.trim() {
                    "sgd" => Optimizer::Sgd,
                    "adam" if matches!(h.optimizer, Optimizer::Adam { .. }) => h.optimizer,
                    "adam" => Optimizer::default(),
                    other => return Err(Error::Config(format!("unknown optimizer `{other}` (sgd or adam)"))),
                }
            }
            "adam_beta1" | "adam_beta2" | "adam_epsilon" => {
                let Optimizer::Adam { beta1, beta2, epsilon } = &mut h.optimizer else {
                    return Err(Error::Config(format!("`{key}` requires optimizer=adam")));
                };
                let slot = match key {
                    "adam_beta1" => beta1,
                    "adam_beta2" => beta2,
                    _ => epsilon,
                };
                *slot = value(key, raw)?;
            }
            "train_seed" => h.seed = value(key, raw)?,
            "seed" => self.seed = value(key, raw)?,
            "n_train" => self.n_train = value(key, raw)?,
            "n_test" => self.n_test = value(key, raw)?,
            "fl_rounds" => self.fl_rounds = value(key, raw)?,
            "fl_local_epochs" => self.fl_local_epochs = value(key, raw)?,
            "nn_dims" => self.hidden = value(key, raw)?,
            "oracle_budget" => self.oracle_budget = value(key, raw)?,
            "grid_center" => {
                self.grid_center = match raw.trim() {
                    "auto" => None,
                    other => match list::<f64>(key, other)?[..] {
                        [x, y, z] => Some(Position3D::new(x, y, z)),
                        _ => return Err(Error::Config("grid_center needs x,y,z or auto".into())),
                    },
                }
            }
            "grid_width" => self.grid_width = value(key, raw)?,
            "grid_points" => self.grid_points = value(key, raw)?,
            "log_floor" => self.log_floor = value(key, raw)?,
            "cdf_points" => self.cdf_points = value(key, raw)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }
}

impl ExperimentConfig {
    /// Current text form of one key, or `None` for Adam keys under SGD.
    pub fn get(&self, key: &str) -> Option<String> {
        let (s, c, h) = (&self.setup, &self.clusters, &self.hyper);
        let adam = match h.optimizer {
            Optimizer::Adam { beta1, beta2, epsilon } => Some((beta1, beta2, epsilon)),
            Optimizer::Sgd => None,
        };
        Some(match key {
            "setup" => s.id.to_string(),
            "d_h" => s.d_h.to_string(),
            "x1" => s.x1.to_string(),
            "y1" => s.y1.to_string(),
            "x2" => s.x2.to_string(),
            "y2" => s.y2.to_string(),
            "wall" => s.wall.to_string(),
            "wall_loss_db" => s.wall_loss_db.to_string(),
            "ris_rows" => s.ris_rows.to_string(),
            "ris_cols" => s.ris_cols.to_string(),
            "element_spacing" => s.spacing_wavelengths.to_string(),
            "groups" => s.groups.to_string(),
            "phase_bits" => s.phase_bits.to_string(),
            "tx_power" => s.tx_power.to_string(),
            "noise_dbm" => s.noise_dbm.to_string(),
            "carrier_frequency" => s.carrier_frequency.to_string(),
            "pathloss_exponent" => s.pathloss_exponent.to_string(),
            "radiation_pattern" => pattern_text(s.pattern),
            "rays_per_cluster" => join(&c.rays_per_cluster),
            "azimuth_center_min" => c.azimuth_center_range.0.to_string(),
            "azimuth_center_max" => c.azimuth_center_range.1.to_string(),
            "elevation_center_min" => c.elevation_center_range.0.to_string(),
            "elevation_center_max" => c.elevation_center_range.1.to_string(),
            "intra_cluster_spread" => c.intra_cluster_spread.to_string(),
            "los_probability" => c.los_probability.to_string(),
            "learning_rate" => h.learning_rate.to_string(),
            "epochs" => h.epochs.to_string(),
            "batch_size" => h.batch_size.to_string(),
            "lambda" => h.lambda.to_string(),
            "optimizer" => if adam.is_some() { "adam" } else { "sgd" }.to_string(),
            "adam_beta1" => adam?.0.to_string(),
            "adam_beta2" => adam?.1.to_string(),
            "adam_epsilon" => adam?.2.to_string(),
            "train_seed" => h.seed.to_string(),
            "seed" => self.seed.to_string(),
            "n_train" => self.n_train.to_string(),
            "n_test" => self.n_test.to_string(),
            "fl_rounds" => self.fl_rounds.to_string(),
            "fl_local_epochs" => self.fl_local_epochs.to_string(),
            "nn_dims" => self.hidden.to_string(),
            "oracle_budget" => self.oracle_budget.to_string(),
            "grid_center" => match self.grid_center {
                None => "auto".to_string(),
                Some(p) => join(&p.to_array()),
            },
            "grid_width" => self.grid_width.to_string(),
            "grid_points" => self.grid_points.to_string(),
            "log_floor" => self.log_floor.to_string(),
            "cdf_points" => self.cdf_points.to_string(),
            _ => return None,
        })
    }

    /// Every key in canonical order; parsing the result gives back `self`.
    pub fn to_text(&self) -> String {
        KEYS.iter().filter_map(|k| self.get(k).map(|v| format!("{k}={v}\n"))).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.setup.validate()?;
        self.clusters.validate()?;
        self.hyper.validate()?;
        if self.n_train == 0 || self.n_test == 0 {
            return Err(Error::Config("n_train and n_test must be positive".into()));
        }
        if self.fl_local_epochs == 0 {
            return Err(Error::Config("fl_local_epochs must be positive".into()));
        }
        if !(self.grid_width >= 0.0 && self.grid_width.is_finite()) || self.grid_points == 0 {
            return Err(Error::Config("grid needs a finite width and at least one point".into()));
        }
        if !self.log_floor.is_finite() || self.cdf_points < 2 {
            return Err(Error::Config("log_floor must be finite and cdf_points at least 2".into()));
        }
        Ok(())
    }

    /// Centre of the RX square.
    pub fn grid_center(&self) -> Position3D {
        self.grid_center.unwrap_or_else(|| self.setup.rx())
    }
}
