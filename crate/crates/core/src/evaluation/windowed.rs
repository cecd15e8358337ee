use std::collections::VecDeque;

use super::ConfusionCounts;

/// Metrics over the most recent window of outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSnapshot {
    /// Instances evaluated when the snapshot was taken.
    pub position: u64,
    pub accuracy: Option<f64>,
    pub kappa: Option<f64>,
}

/// Ring of the last `w` outcomes with an incrementally maintained confusion
/// matrix. Snapshots are emitted every `w` outcomes (tumbling) or after every
/// outcome (sliding).
#[derive(Debug, Clone)]
pub struct WindowedEvaluator {
    window: usize,
    sliding: bool,
    ring: VecDeque<(usize, usize)>,
    counts: ConfusionCounts,
    seen: u64,
    series: Vec<MetricSnapshot>,
}

impl WindowedEvaluator {
    pub const DEFAULT_WINDOW: usize = 1000;

    /// # Panics
    /// If `window` is zero.
    pub fn new(classes: usize, window: usize) -> Self {
        assert!(window > 0, "window size must be positive");
        Self {
            window,
            sliding: false,
            ring: VecDeque::with_capacity(window),
            counts: ConfusionCounts::new(classes),
            seen: 0,
            series: Vec::new(),
        }
    }

    pub fn sliding(mut self, sliding: bool) -> Self {
        self.sliding = sliding;
        self
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.ring.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ring.is_empty()
    }

    pub fn counts(&self) -> &ConfusionCounts {
        &self.counts
    }

    /// Records one outcome; returns the snapshot if one was emitted.
    pub fn add(&mut self, truth: usize, predicted: usize) -> Option<MetricSnapshot> {
        if self.ring.len() == self.window {
            let (t, p) = self.ring.pop_front().expect("full ring");
            self.counts.remove(t, p);
        }
        self.ring.push_back((truth, predicted));
        self.counts.add(truth, predicted);
        self.seen += 1;
        if self.sliding || self.seen % self.window as u64 == 0 {
            let snap = self.snapshot();
            self.series.push(snap);
            Some(snap)
        } else {
            None
        }
    }

    /// Metrics over the current ring contents.
    pub fn snapshot(&self) -> MetricSnapshot {
        MetricSnapshot {
            position: self.seen,
            accuracy: self.counts.accuracy(),
            kappa: self.counts.kappa(),
        }
    }

    pub fn series(&self) -> &[MetricSnapshot] {
        &self.series
    }

    pub fn into_series(self) -> Vec<MetricSnapshot> {
        self.series
    }
}
