//! Sufficient statistics kept at tree leaves.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Weighted running mean and variance (West's form of Welford's update),
/// together with the observed range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianEstimator {
    weight: f64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
    /// `variance()` and its `ln`, refreshed on every update.
    var: f64,
    ln_var: f64,
}

impl Default for GaussianEstimator {
    fn default() -> Self {
        Self {
            weight: 0.0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            var: 0.0,
            ln_var: f64::NEG_INFINITY,
        }
    }
}

impl GaussianEstimator {
    pub fn add(&mut self, value: f64, weight: f64) {
        if weight <= 0.0 {
            return;
        }
        if self.weight == 0.0 {
            self.weight = weight;
            self.mean = value;
            self.m2 = 0.0;
        } else {
            self.weight += weight;
            let delta = value - self.mean;
            self.mean += weight * delta / self.weight;
            self.m2 += weight * delta * (value - self.mean);
        }
        self.min = self.min.min(value);
        self.max = self.max.max(value);
        self.var = if self.weight > 1.0 {
            (self.m2 / (self.weight - 1.0)).max(0.0)
        } else {
            0.0
        };
        self.ln_var = self.var.ln();
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Sample variance, `m2 / (weight - 1)`; 0 until the weight exceeds 1.
    pub fn variance(&self) -> f64 {
        self.var
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Natural log of the fitted density at `value`. A zero-variance fit is a
    /// point mass; an empty estimator has no mass anywhere.
    pub fn ln_density(&self, value: f64) -> f64 {
        if self.weight <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let var = self.variance();
        if var > 0.0 {
            let d = value - self.mean;
            -0.5 * d * d / var - 0.5 * self.ln_var - HALF_LN_2PI
        } else if value == self.mean {
            0.0
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn density(&self, value: f64) -> f64 {
        let var = self.variance();
        if self.weight <= 0.0 {
            0.0
        } else if var > 0.0 {
            let d = value - self.mean;
            (-0.5 * d * d / var).exp() / (2.0 * PI * var).sqrt()
        } else if value == self.mean {
            1.0
        } else {
            0.0
        }
    }

    /// Estimated weight of observations `<= threshold`.
    pub fn weight_at_or_below(&self, threshold: f64) -> f64 {
        if self.weight <= 0.0 || threshold < self.min {
            0.0
        } else if threshold >= self.max {
            self.weight
        } else {
            let sd = self.std_dev();
            if sd > 0.0 {
                normal_cdf((threshold - self.mean) / sd) * self.weight
            } else if threshold >= self.mean {
                self.weight
            } else {
                0.0
            }
        }
    }
}

/// Per-attribute, per-class statistics of one leaf.
#[derive(Debug, Clone)]
pub enum AttributeObserver {
    Numeric {
        per_class: Vec<GaussianEstimator>,
    },
    Nominal {
        /// `counts[value * classes + class]`
        counts: Vec<f64>,
        class_totals: Vec<f64>,
        values: usize,
    },
}

impl AttributeObserver {
    pub fn numeric(classes: usize) -> Self {
        AttributeObserver::Numeric {
            per_class: vec![GaussianEstimator::default(); classes],
        }
    }

    pub fn nominal(values: usize, classes: usize) -> Self {
        AttributeObserver::Nominal {
            counts: vec![0.0; values * classes],
            class_totals: vec![0.0; classes],
            values,
        }
    }

    /// Missing values (`NaN`) are not recorded.
    pub fn observe(&mut self, value: f64, class: usize, weight: f64) {
        if value.is_nan() {
            return;
        }
        match self {
            AttributeObserver::Numeric { per_class } => per_class[class].add(value, weight),
            AttributeObserver::Nominal {
                counts,
                class_totals,
                ..
            } => {
                let classes = class_totals.len();
                counts[value as usize * classes + class] += weight;
                class_totals[class] += weight;
            }
        }
    }

    /// `ln P(value | class)`; Laplace-smoothed for nominal attributes.
    pub fn ln_likelihood(&self, value: f64, class: usize) -> f64 {
        match self {
            AttributeObserver::Numeric { per_class } => per_class[class].ln_density(value),
            AttributeObserver::Nominal {
                counts,
                class_totals,
                values,
            } => {
                let classes = class_totals.len();
                let c = counts[value as usize * classes + class];
                ((c + 1.0) / (class_totals[class] + *values as f64)).ln()
            }
        }
    }
}
