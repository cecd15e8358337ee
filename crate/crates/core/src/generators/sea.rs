use std::sync::Arc;

use rand::Rng;

use super::GeneratorError;
use crate::rng::{self, StreamRng};
use crate::schema::{AttributeSpec, Instance, Schema, Task};
use crate::stream::{InstanceStream, StreamError};

/// Decision thresholds on `x1 + x2` for concept functions 1 through 4.
pub const SEA_THRESHOLDS: [f64; 4] = [8.0, 9.0, 7.0, 9.5];

/// Index of the label emitted when `x1 + x2 <= threshold`.
pub const SEA_POSITIVE: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SeaConfig {
    pub function_id: u8,
    pub noise_fraction: f64,
    pub seed: u64,
}

impl SeaConfig {
    pub fn new(function_id: u8) -> Self {
        Self {
            function_id,
            noise_fraction: 0.1,
            seed: 1,
        }
    }

    pub fn noise(mut self, fraction: f64) -> Self {
        self.noise_fraction = fraction;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn check(&self) -> Result<(), GeneratorError> {
        if !(1..=4).contains(&self.function_id) {
            return Err(GeneratorError::Config(format!(
                "SEA function must be 1-4, got {}",
                self.function_id
            )));
        }
        if !(0.0..1.0).contains(&self.noise_fraction) {
            return Err(GeneratorError::Config(format!(
                "noise fraction must be in [0,1), got {}",
                self.noise_fraction
            )));
        }
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        SEA_THRESHOLDS[self.function_id as usize - 1]
    }
}

/// Noise-free SEA label for a feature vector.
pub fn sea_label(function_id: u8, x: &[f64]) -> usize {
    if x[0] + x[1] <= SEA_THRESHOLDS[function_id as usize - 1] {
        SEA_POSITIVE
    } else {
        1 - SEA_POSITIVE
    }
}

pub fn sea_schema() -> Schema {
    Schema::new(
        (1..=3).map(|i| AttributeSpec::numeric(format!("attrib{i}"))).collect(),
        AttributeSpec::nominal("class", ["negative", "positive"]).expect("static values"),
        Task::Classification,
    )
    .expect("static schema")
    .with_relation("sea")
}

/// Three uniform features on [0, 10); only the first two are relevant.
#[derive(Debug, Clone)]
pub struct SeaGenerator {
    cfg: SeaConfig,
    schema: Arc<Schema>,
    rng: StreamRng,
    position: u64,
    last_flipped: bool,
}

impl SeaGenerator {
    pub fn new(cfg: SeaConfig) -> Result<Self, GeneratorError> {
        cfg.check()?;
        Ok(Self {
            rng: rng::seeded(cfg.seed),
            cfg,
            schema: Arc::new(sea_schema()),
            position: 0,
            last_flipped: false,
        })
    }

    pub fn config(&self) -> &SeaConfig {
        &self.cfg
    }

    /// Whether noise flipped the label of the last emitted instance.
    pub fn last_flipped(&self) -> bool {
        self.last_flipped
    }

    pub fn next_sample(&mut self) -> Instance {
        let x: Vec<f64> = (0..3).map(|_| 10.0 * self.rng.random::<f64>()).collect();
        let mut label = sea_label(self.cfg.function_id, &x);
        self.last_flipped = self.rng.random::<f64>() < self.cfg.noise_fraction;
        if self.last_flipped {
            label = 1 - label;
        }
        self.position += 1;
        Instance::labeled(x, label)
    }
}

impl InstanceStream for SeaGenerator {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn next_instance(&mut self) -> Result<Option<Instance>, StreamError> {
        Ok(Some(self.next_sample()))
    }

    fn restart(&mut self) -> Result<(), StreamError> {
        self.rng = rng::seeded(self.cfg.seed);
        self.position = 0;
        self.last_flipped = false;
        Ok(())
    }

    fn position(&self) -> u64 {
        self.position
    }
}
