//! Change detection over univariate bounded streams.

mod adwin;

use thiserror::Error;

pub use self::adwin::{Adwin, AdwinConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorStatus {
    Stable,
    Change,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorReport {
    pub status: DetectorStatus,
    /// Mean of the current window.
    pub estimate: f64,
    /// Number of values in the current window.
    pub width: u64,
}

impl DetectorReport {
    pub fn is_change(&self) -> bool {
        self.status == DetectorStatus::Change
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DetectorError {
    #[error("value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("invalid detector configuration: {0}")]
    Config(String),
}

/// Interface shared by every change detector.
pub trait Detector: Send {
    fn update(&mut self, value: f64) -> Result<DetectorReport, DetectorError>;

    /// Returns the detector to its freshly constructed state.
    fn reset(&mut self);

    fn estimate(&self) -> f64;

    fn width(&self) -> u64;
}
