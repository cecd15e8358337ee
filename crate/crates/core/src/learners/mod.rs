//! Incremental classifiers.

mod ensemble;
pub mod split;
pub mod stats;
mod tree;

use thiserror::Error;

use crate::schema::Instance;

pub use self::ensemble::{
    AdaptiveRandomForest, ArfConfig, Ensemble, EnsembleConfig, EnsembleKind, Member, OnlineBagging,
    Replacement, SrpConfig, StreamingRandomPatches,
};
pub(crate) use self::tree::normalize_or_uniform;
pub use self::tree::{
    FeatureSampler, HoeffdingTree, HtConfig, LeafPrediction, SplitCriterion, SplitTest, TreeEvent,
    TreeVariant,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error("cannot train on an unlabeled instance")]
    Unlabeled,
    #[error("label {label} outside 0..{classes}")]
    LabelOutOfRange { label: f64, classes: usize },
    #[error("expected {expected} features, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("learner only supports classification with at least two classes")]
    UnsupportedTask,
    #[error("invalid learner configuration: {0}")]
    Config(String),
}

/// An online classifier.
pub trait Classifier: Send + Sync {
    fn num_classes(&self) -> usize;

    /// Writes a probability distribution over classes into `out`, which has
    /// length [`num_classes`](Self::num_classes). Must not mutate state.
    fn predict_proba_into(&self, inst: &Instance, out: &mut [f64]);

    fn predict_proba(&self, inst: &Instance) -> Vec<f64> {
        let mut out = vec![0.0; self.num_classes()];
        self.predict_proba_into(inst, &mut out);
        out
    }

    fn predict(&self, inst: &Instance) -> usize {
        argmax(&self.predict_proba(inst))
    }

    fn train(&mut self, inst: &Instance) -> Result<(), LearnerError>;

    /// Predicts `inst` into `out`, then trains on it if it is labeled. Same
    /// result as [`predict_proba_into`](Self::predict_proba_into) followed by
    /// [`train`](Self::train).
    fn test_then_train(&mut self, inst: &Instance, out: &mut [f64]) -> Result<(), LearnerError> {
        self.predict_proba_into(inst, out);
        if inst.label().is_some() {
            self.train(inst)?;
        }
        Ok(())
    }

    /// Forgets everything learned; configuration and seed are kept.
    fn reset(&mut self);

    fn name(&self) -> String {
        std::any::type_name::<Self>()
            .rsplit("::")
            .next()
            .unwrap_or("classifier")
            .to_string()
    }
}

impl<C: Classifier + ?Sized> Classifier for Box<C> {
    fn num_classes(&self) -> usize {
        (**self).num_classes()
    }
    fn predict_proba_into(&self, inst: &Instance, out: &mut [f64]) {
        (**self).predict_proba_into(inst, out)
    }
    fn train(&mut self, inst: &Instance) -> Result<(), LearnerError> {
        (**self).train(inst)
    }
    fn test_then_train(&mut self, inst: &Instance, out: &mut [f64]) -> Result<(), LearnerError> {
        (**self).test_then_train(inst, out)
    }
    fn reset(&mut self) {
        (**self).reset()
    }
    fn name(&self) -> String {
        (**self).name()
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn check_labeled(
    inst: &Instance,
    features: usize,
    classes: usize,
) -> Result<usize, LearnerError> {
    if inst.x.len() != features {
        return Err(LearnerError::Arity {
            expected: features,
            got: inst.x.len(),
        });
    }
    let y = match inst.y {
        Some(y) if !y.is_nan() => y,
        _ => return Err(LearnerError::Unlabeled),
    };
    if y < 0.0 || y.fract() != 0.0 || y as usize >= classes {
        return Err(LearnerError::LabelOutOfRange { label: y, classes });
    }
    Ok(y as usize)
}
