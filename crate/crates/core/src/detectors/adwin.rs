//! ADWIN over an exponential histogram.
//!
//! The window is kept as rows of buckets. Row `i` holds buckets that each
//! summarise `2^i` consecutive values; when a row overflows its two oldest
//! buckets merge into one bucket of the next row. Candidate cuts are the
//! bucket boundaries, so an update costs O(log W) rather than O(W).

use super::{Detector, DetectorError, DetectorReport, DetectorStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdwinConfig {
    /// Confidence parameter in (0, 1); smaller is less sensitive.
    pub delta: f64,
    pub max_buckets_per_row: usize,
    /// No cut is tested while the window is shorter than this.
    pub min_instances_before_detection: u64,
}

impl Default for AdwinConfig {
    fn default() -> Self {
        Self {
            delta: 0.002,
            max_buckets_per_row: 5,
            min_instances_before_detection: 10,
        }
    }
}

impl AdwinConfig {
    pub fn with_delta(delta: f64) -> Self {
        Self {
            delta,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Adwin {
    cfg: AdwinConfig,
    /// `rows[i]` holds bucket sums, oldest first.
    rows: Vec<Vec<f64>>,
    buckets: usize,
    total: f64,
    width: u64,
    changes: u64,
}

impl Default for Adwin {
    fn default() -> Self {
        Self::new(AdwinConfig::default()).expect("default config is valid")
    }
}

impl Adwin {
    pub fn new(cfg: AdwinConfig) -> Result<Self, DetectorError> {
        if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
            return Err(DetectorError::Config(format!(
                "delta must be in (0,1), got {}",
                cfg.delta
            )));
        }
        if cfg.max_buckets_per_row == 0 {
            return Err(DetectorError::Config(
                "max_buckets_per_row must be at least 1".into(),
            ));
        }
        Ok(Self {
            cfg,
            rows: vec![Vec::new()],
            buckets: 0,
            total: 0.0,
            width: 0,
            changes: 0,
        })
    }

    pub fn with_delta(delta: f64) -> Result<Self, DetectorError> {
        Self::new(AdwinConfig::with_delta(delta))
    }

    pub fn config(&self) -> &AdwinConfig {
        &self.cfg
    }

    /// Number of bucket rows currently in use.
    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    /// Number of change reports since construction (survives `reset`).
    pub fn changes_detected(&self) -> u64 {
        self.changes
    }

    /// Infallible update for a 0/1 outcome, e.g. a classification error.
    pub fn update_bit(&mut self, bit: bool) -> DetectorReport {
        self.push(if bit { 1.0 } else { 0.0 })
    }

    fn push(&mut self, value: f64) -> DetectorReport {
        self.insert(value);
        let mut changed = false;
        while self.has_significant_cut() {
            self.drop_oldest();
            changed = true;
        }
        if changed {
            self.changes += 1;
        }
        DetectorReport {
            status: if changed {
                DetectorStatus::Change
            } else {
                DetectorStatus::Stable
            },
            estimate: self.estimate(),
            width: self.width,
        }
    }

    fn insert(&mut self, value: f64) {
        self.rows[0].push(value);
        self.buckets += 1;
        self.total += value;
        self.width += 1;
        let mut row = 0;
        while self.rows[row].len() > self.cfg.max_buckets_per_row {
            let merged = self.rows[row][0] + self.rows[row][1];
            self.rows[row].drain(..2);
            if row + 1 == self.rows.len() {
                self.rows.push(Vec::with_capacity(self.cfg.max_buckets_per_row + 1));
            }
            self.rows[row + 1].push(merged);
            self.buckets -= 1;
            row += 1;
        }
    }

    fn drop_oldest(&mut self) {
        let last = self.rows.len() - 1;
        let sum = self.rows[last].remove(0);
        self.total -= sum;
        self.width -= 1 << last;
        self.buckets -= 1;
        if self.rows[last].is_empty() && last > 0 {
            self.rows.pop();
        }
    }

    /// Tests every bucket boundary, oldest first.
    fn has_significant_cut(&self) -> bool {
        if self.width < self.cfg.min_instances_before_detection || self.buckets < 2 {
            return false;
        }
        let cuts = (self.buckets - 1) as f64;
        let log_term = (4.0 * cuts / self.cfg.delta).ln();
        let width = self.width as f64;
        let scale = 0.5 * log_term * width;
        let mut n0 = 0.0;
        let mut s0 = 0.0;
        // the newest bucket closes no cut
        let mut cuts_left = self.buckets - 1;
        for (row, buckets) in self.rows.iter().enumerate().rev() {
            let size = (1u64 << row) as f64;
            let take = buckets.len().min(cuts_left);
            for &sum in &buckets[..take] {
                n0 += size;
                s0 += sum;
                let n1 = width - n0;
                // |s0/n0 - s1/n1| >= sqrt((1/n0 + 1/n1) / 2 * L), scaled by n0·n1
                // and squared so the scan needs no division
                let s1 = self.total - s0;
                let lhs = s0 * n1 - s1 * n0;
                if lhs * lhs >= scale * n0 * n1 {
                    return true;
                }
            }
            cuts_left -= take;
        }
        false
    }
}

impl Detector for Adwin {
    fn update(&mut self, value: f64) -> Result<DetectorReport, DetectorError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(DetectorError::OutOfRange(value));
        }
        Ok(self.push(value))
    }

    fn reset(&mut self) {
        let changes = self.changes;
        *self = Self::new(self.cfg).expect("config was validated");
        self.changes = changes;
    }

    fn estimate(&self) -> f64 {
        if self.width == 0 {
            0.0
        } else {
            self.total / self.width as f64
        }
    }

    fn width(&self) -> u64 {
        self.width
    }
}
