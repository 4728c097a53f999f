//! Supervised learning of phase configurations: feature/label encoding,
//! dataset generation with oracle labels, training (centralized, per-RIS and
//! federated) and inference.

mod dataset;
pub mod encode;
pub mod io;
mod train;

pub use dataset::{
    build_dataset, draw_sample, generate_dataset, generate_labeled, label, rx_position, Dataset, LabeledRealization,
    Normalization, Problem, RxGrid, Sample, Split,
};
pub use encode::{
    decode_output, encode_channel, encode_label, encode_position, EncoderKind, FeatureSpec, DEFAULT_LOG_FLOOR,
};
pub use train::{
    infer_batch, infer_configs, network_dims, train_federated, train_model, train_variant, HiddenLayers, Observation,
    Predictor, TrainOutcome,
};
