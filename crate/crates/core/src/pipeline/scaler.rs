use std::sync::Arc;

use super::Transformer;
use crate::schema::{Instance, Schema};

/// Running mean and M2 of one attribute.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Sample standard deviation; 0 below two observations.
    pub fn std_dev(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2.max(0.0) / (self.count - 1) as f64).sqrt()
        }
    }
}

/// Online standardisation of numeric attributes.
///
/// Each instance updates the moments before it is transformed. Attributes
/// with fewer than two observations or zero spread map to 0. Nominal and
/// missing values pass through unchanged.
#[derive(Debug, Clone)]
pub struct Scaler {
    schema: Arc<Schema>,
    moments: Vec<Option<Moments>>,
}

impl Scaler {
    pub fn new(schema: Arc<Schema>) -> Self {
        let moments = schema
            .attributes()
            .iter()
            .map(|a| (!a.is_nominal()).then(Moments::default))
            .collect();
        Self { schema, moments }
    }

    /// Moments of attribute `i`; `None` for nominal attributes.
    pub fn moments(&self, i: usize) -> Option<&Moments> {
        self.moments[i].as_ref()
    }

    pub fn process(&mut self, inst: &Instance) -> Instance {
        let mut out = inst.clone();
        for (v, m) in out.x.iter_mut().zip(&mut self.moments) {
            let Some(m) = m else { continue };
            if v.is_nan() {
                continue;
            }
            m.push(*v);
            let sd = m.std_dev();
            *v = if sd > 0.0 { (*v - m.mean) / sd } else { 0.0 };
        }
        out
    }
}

impl Transformer for Scaler {
    fn transform(&mut self, inst: &Instance) -> Instance {
        self.process(inst)
    }

    fn output_schema(&self) -> Arc<Schema> {
        self.schema.clone()
    }

    fn reset(&mut self) {
        for m in self.moments.iter_mut().flatten() {
            *m = Moments::default();
        }
    }
}
