use std::sync::Arc;

use rand::Rng;

use super::GeneratorError;
use crate::rng::{self, StreamRng};
use crate::schema::{AttributeSpec, Instance, Schema, Task};
use crate::stream::{InstanceStream, StreamError};

/// Rotating-hyperplane concept. Defaults are the benchmark preset.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneConfig {
    pub n_attributes: usize,
    pub n_drift_attributes: usize,
    pub magnitude_of_change: f64,
    pub noise_fraction: f64,
    pub sigma_direction_change_prob: f64,
    pub seed: u64,
}

impl Default for HyperplaneConfig {
    fn default() -> Self {
        Self {
            n_attributes: 10,
            n_drift_attributes: 2,
            magnitude_of_change: 0.001,
            noise_fraction: 0.05,
            sigma_direction_change_prob: 0.1,
            seed: 1,
        }
    }
}

impl HyperplaneConfig {
    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn check(&self) -> Result<(), GeneratorError> {
        let bad = |m: String| Err(GeneratorError::Config(m));
        if self.n_attributes < 2 {
            return bad(format!("need at least 2 attributes, got {}", self.n_attributes));
        }
        if self.n_drift_attributes > self.n_attributes {
            return bad("more drifting attributes than attributes".into());
        }
        if !(self.magnitude_of_change >= 0.0) {
            return bad("magnitude of change must be non-negative".into());
        }
        if !(0.0..1.0).contains(&self.noise_fraction) {
            return bad(format!("noise fraction must be in [0,1), got {}", self.noise_fraction));
        }
        if !(0.0..=1.0).contains(&self.sigma_direction_change_prob) {
            return bad("direction change probability must be in [0,1]".into());
        }
        Ok(())
    }
}

pub fn hyperplane_schema(n_attributes: usize) -> Schema {
    Schema::new(
        (1..=n_attributes)
            .map(|i| AttributeSpec::numeric(format!("att{i}")))
            .collect(),
        AttributeSpec::nominal("class", ["class1", "class2"]).expect("static values"),
        Task::Classification,
    )
    .expect("static schema")
    .with_relation("hyperplane")
}

#[derive(Debug, Clone)]
pub struct HyperplaneGenerator {
    cfg: HyperplaneConfig,
    schema: Arc<Schema>,
    rng: StreamRng,
    weights: Vec<f64>,
    directions: Vec<f64>,
    position: u64,
    last_flipped: bool,
}

impl HyperplaneGenerator {
    pub fn new(cfg: HyperplaneConfig) -> Result<Self, GeneratorError> {
        cfg.check()?;
        let mut g = Self {
            schema: Arc::new(hyperplane_schema(cfg.n_attributes)),
            rng: rng::seeded(cfg.seed),
            weights: Vec::new(),
            directions: Vec::new(),
            cfg,
            position: 0,
            last_flipped: false,
        };
        g.init();
        Ok(g)
    }

    fn init(&mut self) {
        self.rng = rng::seeded(self.cfg.seed);
        let d = self.cfg.n_attributes;
        self.weights = (0..d).map(|_| self.rng.random::<f64>()).collect();
        self.directions = (0..d)
            .map(|i| if i < self.cfg.n_drift_attributes { 1.0 } else { 0.0 })
            .collect();
        self.position = 0;
        self.last_flipped = false;
    }

    pub fn config(&self) -> &HyperplaneConfig {
        &self.cfg
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn last_flipped(&self) -> bool {
        self.last_flipped
    }

    pub fn next_sample(&mut self) -> Instance {
        let d = self.cfg.n_attributes;
        let mut x = Vec::with_capacity(d);
        let mut sum = 0.0;
        let mut weight_sum = 0.0;
        for w in &self.weights {
            let v = self.rng.random::<f64>();
            sum += w * v;
            weight_sum += w;
            x.push(v);
        }
        let mut label = usize::from(sum >= weight_sum * 0.5);
        self.last_flipped = self.rng.random::<f64>() < self.cfg.noise_fraction;
        if self.last_flipped {
            label = 1 - label;
        }
        for i in 0..self.cfg.n_drift_attributes {
            self.weights[i] += self.directions[i] * self.cfg.magnitude_of_change;
            if self.rng.random::<f64>() < self.cfg.sigma_direction_change_prob {
                self.directions[i] = -self.directions[i];
            }
        }
        self.position += 1;
        Instance::labeled(x, label)
    }
}

/// Noise-free label of `x` under `weights`.
pub fn hyperplane_label(weights: &[f64], x: &[f64]) -> usize {
    let sum: f64 = weights.iter().zip(x).map(|(w, v)| w * v).sum();
    let total: f64 = weights.iter().sum();
    usize::from(sum >= total * 0.5)
}

impl InstanceStream for HyperplaneGenerator {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn next_instance(&mut self) -> Result<Option<Instance>, StreamError> {
        Ok(Some(self.next_sample()))
    }

    fn restart(&mut self) -> Result<(), StreamError> {
        self.init();
        Ok(())
    }

    fn position(&self) -> u64 {
        self.position
    }
}
