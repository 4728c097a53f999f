//! Link-level simulation and learned phase configuration for wireless links
//! assisted by several reconfigurable intelligent surfaces (RISs).
//!
//! The pipeline: synthesize channels ([`channel`]), score discrete phase
//! configurations ([`ris`]), label them with exhaustive search ([`oracle`]),
//! train small MLPs to predict the labels ([`mlp`], [`learning`]), and compare
//! every policy on a held-out split ([`harness`]).

pub mod channel;
pub mod error;
pub mod mlp;
pub mod oracle;
pub mod ris;
mod textfmt;
pub mod learning;
pub mod harness;

pub use channel::{ChannelRealization, ClusterConfig, Position3D, RisGeometry, Scene, StreamKey};
pub use error::{Error, Result};
pub use mlp::{MlpModel, TrainHyper};
pub use oracle::OracleResult;
pub use ris::{Codebook, GroupMap, LinkBudget, PhaseConfig};
