//! Synthetic streams and drift composition.

mod drift;
mod hyperplane;
mod sea;

use thiserror::Error;

pub use self::drift::{gradual_weight, DriftKind, DriftSpec, DriftStream, DriftStreamPart};
pub use self::hyperplane::{
    hyperplane_label, hyperplane_schema, HyperplaneConfig, HyperplaneGenerator,
};
pub use self::sea::{sea_label, sea_schema, SeaConfig, SeaGenerator, SEA_POSITIVE, SEA_THRESHOLDS};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("invalid generator configuration: {0}")]
    Config(String),
    #[error("invalid drift plan: {0}")]
    Plan(String),
}

/// Instances in the "Hyper100K" benchmark preset.
pub const HYPER100K_LEN: u64 = 100_000;

/// The benchmark Hyperplane preset for one seed.
pub fn hyper100k(seed: u64) -> HyperplaneGenerator {
    HyperplaneGenerator::new(HyperplaneConfig::default().seed(seed)).expect("preset is valid")
}
