//! Split evaluation: entropy, information gain and the Hoeffding bound.

use smallvec::SmallVec;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("the Hoeffding bound needs at least one observation")]
    NoObservations,
    #[error("confidence must be in (0, 1), got {0}")]
    Confidence(f64),
}

/// `sqrt(R² ln(1/δ) / 2n)`: with probability `1 - δ` the true mean of a
/// statistic with range `R` lies within this distance of the mean of `n`
/// observations.
pub fn hoeffding_bound(range: f64, delta: f64, n: f64) -> Result<f64, BoundError> {
    if !(n >= 1.0) {
        return Err(BoundError::NoObservations);
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(BoundError::Confidence(delta));
    }
    Ok((range * range * (1.0 / delta).ln() / (2.0 * n)).sqrt())
}

/// Range of information gain for `classes` labels.
pub fn info_gain_range(classes: usize) -> f64 {
    (classes.max(2) as f64).log2()
}

/// Shannon entropy in bits of an unnormalised distribution.
pub fn entropy(dist: &[f64]) -> f64 {
    let total: f64 = dist.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut h = 0.0;
    for &w in dist {
        if w > 0.0 {
            h -= w * w.log2();
        }
    }
    (h + total * total.log2()) / total
}

/// Information gain of splitting `pre` into `post` branches.
///
/// Splits that leave fewer than two branches holding more than
/// `min_branch_fraction` of the weight are rejected with `-inf`.
pub fn info_gain<D: AsRef<[f64]>>(pre: &[f64], post: &[D], min_branch_fraction: f64) -> f64 {
    info_gain_from_entropy(entropy(pre), post, min_branch_fraction)
}

/// [`info_gain`] given the entropy of the unsplit distribution.
pub fn info_gain_from_entropy<D: AsRef<[f64]>>(
    pre_entropy: f64,
    post: &[D],
    min_branch_fraction: f64,
) -> f64 {
    let sums: SmallVec<[f64; 8]> = post.iter().map(|d| d.as_ref().iter().sum()).collect();
    let total: f64 = sums.iter().sum();
    if total <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let substantial = sums
        .iter()
        .filter(|&&s| s / total > min_branch_fraction)
        .count();
    if substantial < 2 {
        return f64::NEG_INFINITY;
    }
    let post_entropy: f64 = post
        .iter()
        .zip(&sums)
        .map(|(d, &s)| s * entropy(d.as_ref()))
        .sum::<f64>()
        / total;
    pre_entropy - post_entropy
}

/// Evenly spaced thresholds strictly inside `(min, max)`.
pub fn candidate_thresholds(min: f64, max: f64, bins: usize) -> impl Iterator<Item = f64> {
    let range = max - min;
    (0..bins)
        .map(move |i| range / (bins as f64 + 1.0) * (i as f64 + 1.0) + min)
        .filter(move |&t| t > min && t < max)
}
