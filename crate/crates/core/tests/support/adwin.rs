use std::collections::VecDeque;

use rand::Rng;
use streamlearn::detectors::{Adwin, AdwinConfig, Detector};
use streamlearn::rng;

/// Stores every value and tests every cut with the textbook bound
/// `eps = sqrt(1/(2m) · ln(4/δ'))`, `m` the harmonic mean of the two
/// sub-window lengths and `δ' = δ / cuts`.
pub struct ExactAdwin {
    delta: f64,
    min_width: usize,
    pub window: VecDeque<f64>,
}

impl ExactAdwin {
    pub fn new(delta: f64, min_width: usize) -> Self {
        Self {
            delta,
            min_width,
            window: VecDeque::new(),
        }
    }

    fn cut_found(&self) -> bool {
        let w = self.window.len();
        if w < self.min_width || w < 2 {
            return false;
        }
        let cuts = (w - 1) as f64;
        let delta_prime = self.delta / cuts;
        let total: f64 = self.window.iter().sum();
        let mut left = 0.0;
        for (i, v) in self.window.iter().take(w - 1).enumerate() {
            left += v;
            let n0 = (i + 1) as f64;
            let n1 = (w - i - 1) as f64;
            let mu0 = left / n0;
            let mu1 = (total - left) / n1;
            let m = 1.0 / (1.0 / n0 + 1.0 / n1);
            let eps = ((1.0 / (2.0 * m)) * (4.0 / delta_prime).ln()).sqrt();
            if (mu0 - mu1).abs() >= eps {
                return true;
            }
        }
        false
    }

    pub fn update(&mut self, value: f64) -> bool {
        self.window.push_back(value);
        let mut changed = false;
        while self.cut_found() {
            self.window.pop_front();
            changed = true;
        }
        changed
    }
}

pub fn bernoulli_step(seed: u64, len: usize, at: usize, p0: f64, p1: f64) -> Vec<f64> {
    let mut r = rng::seeded(seed);
    (0..len)
        .map(|t| {
            let p = if t < at { p0 } else { p1 };
            f64::from(u8::from(r.random::<f64>() < p))
        })
        .collect()
}

pub fn uniform_shift(seed: u64, len: usize, at: usize, shift: f64) -> Vec<f64> {
    let mut r = rng::seeded(seed);
    (0..len)
        .map(|t| {
            let base = r.random::<f64>() * 0.5;
            if t < at {
                base
            } else {
                base + shift
            }
        })
        .collect()
}

pub fn corpus() -> Vec<(String, Vec<f64>)> {
    let mut streams = Vec::new();
    streams.push(("constant".to_string(), vec![0.5; 300]));
    streams.push((
        "zeros then ones".to_string(),
        (0..400).map(|t| f64::from(u8::from(t >= 200))).collect(),
    ));
    streams.push((
        "alternating".to_string(),
        (0..512).map(|t| f64::from((t % 2) as u8)).collect(),
    ));
    for seed in 0..12 {
        streams.push((
            format!("bernoulli 0.2->0.8 seed {seed}"),
            bernoulli_step(seed, 512, 256, 0.2, 0.8),
        ));
        streams.push((
            format!("bernoulli 0.5->0.6 seed {seed}"),
            bernoulli_step(100 + seed, 512, 200, 0.5, 0.6),
        ));
        streams.push((
            format!("stationary bernoulli seed {seed}"),
            bernoulli_step(200 + seed, 500, 500, 0.3, 0.3),
        ));
        streams.push((
            format!("uniform shift seed {seed}"),
            uniform_shift(300 + seed, 480, 150, 0.3),
        ));
    }
    let mut r = rng::seeded(999);
    let multi: Vec<f64> = (0..512)
        .map(|t| {
            let p = [0.1, 0.9, 0.4, 0.7][t / 128];
            f64::from(u8::from(r.random::<f64>() < p))
        })
        .collect();
    streams.push(("four regimes".to_string(), multi));
    streams
}

pub fn histogram_with_singletons(delta: f64, len: usize) -> Adwin {
    Adwin::new(AdwinConfig {
        delta,
        max_buckets_per_row: len.max(1),
        min_instances_before_detection: 10,
    })
    .unwrap()
}

/// Runs the histogram detector (every row wide enough to hold the whole
/// stream) and the exact detector side by side over the corpus at several
/// deltas. Returns the number of change reports compared.
pub fn detection_indices_match() -> Result<usize, String> {
    let mut total_changes = 0;
    for delta in [0.002, 0.05, 0.3] {
        for (name, values) in corpus() {
            if values.len() > 512 {
                return Err(format!("{name}: corpus stream longer than 512"));
            }
            let mut fast = histogram_with_singletons(delta, values.len());
            let mut exact = ExactAdwin::new(delta, 10);
            let mut fast_idx = Vec::new();
            let mut exact_idx = Vec::new();
            for (t, &v) in values.iter().enumerate() {
                let report = fast.update(v).map_err(|e| e.to_string())?;
                if report.is_change() {
                    fast_idx.push(t);
                }
                if exact.update(v) {
                    exact_idx.push(t);
                }
                if report.width != exact.window.len() as u64 {
                    return Err(format!("{name}, delta {delta}: width differs at {t}"));
                }
            }
            if fast_idx != exact_idx {
                return Err(format!("{name}, delta {delta}: {fast_idx:?} vs {exact_idx:?}"));
            }
            total_changes += exact_idx.len();
        }
    }
    // the corpus must actually exercise the drop path
    if total_changes <= 30 {
        return Err(format!("only {total_changes} changes in the corpus"));
    }
    Ok(total_changes)
}

/// Change reports over 50 stationary Bernoulli(0.5) streams of 10 000 values
/// at delta 0.002; at most 2 are allowed.
pub fn stationary_false_alarms() -> Result<u64, String> {
    let mut reports = 0;
    for seed in 0..50 {
        let mut r = rng::seeded(10_000 + seed);
        let mut d = Adwin::with_delta(0.002).map_err(|e| e.to_string())?;
        for _ in 0..10_000 {
            if d.update_bit(r.random::<bool>()).is_change() {
                reports += 1;
            }
        }
    }
    if reports > 2 {
        return Err(format!("{reports} false alarms"));
    }
    Ok(reports)
}
