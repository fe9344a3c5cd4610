//! Desk-scale learning task: a small softmax classifier trained with
//! mini-batch SGD, synthetic Gaussian data, IID and label-skewed
//! partitions, parameter averaging, canonical serialization with an MD5
//! digest, and the poisoning transforms used by attackers.
//!
//! Every function here is pure: the same inputs and seed give
//! byte-identical outputs.

mod attacks;
mod data;
mod model;
mod train;

use thiserror::Error;

pub use attacks::{flip_labels, label_derangement, random_params_like};
pub use data::{generate_synthetic, partition, Dataset, PartitionMode, PartitionSpec};
pub use model::{digest, merge, Arch, ModelParams, MODEL_MAGIC};
pub use train::{evaluate, init_model, loss_and_grad, predict, train, EvalReport, TrainConfig};

#[derive(Debug, Error)]
pub enum LearningError {
    #[error("invalid architecture: {0}")]
    InvalidArch(String),
    #[error("architectures differ: {0} vs {1}")]
    ArchMismatch(Arch, Arch),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("infeasible partition: {0}")]
    InfeasiblePartition(String),
    #[error("invalid training config: {0}")]
    InvalidTrainConfig(String),
    #[error("malformed model file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LearningError>;
