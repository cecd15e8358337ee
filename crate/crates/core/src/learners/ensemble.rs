//! Online bagging ensembles of Hoeffding trees: Adaptive Random Forest and
//! Streaming Random Patches.
//!
//! Both share the member life cycle. A member predicts, is trained with a
//! Poisson(λ) weight, and feeds its 0/1 error into a warning and a drift
//! detector. A warning starts a background tree; a drift promotes it (or a
//! fresh tree) in place of the member. The two differ in how attributes are
//! restricted: ARF samples a fresh subset at every split evaluation, SRP fixes
//! a subspace per tree when it is created.

use std::sync::Arc;

use rand::Rng;
use smallvec::SmallVec;

use super::tree::{FeatureSampler, HoeffdingTree, HtConfig};
use super::{argmax, check_labeled, normalize_or_uniform, Classifier, LearnerError};
use crate::detectors::{Adwin, Detector};
use crate::rng::{self, StreamRng};
use crate::schema::{Instance, Schema};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OnlineBagging {
    /// Each member sees each instance with weight k ~ Poisson(λ).
    Poisson(f64),
    /// Every member sees every instance with weight 1.
    Off,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub ensemble_size: usize,
    pub bagging: OnlineBagging,
    pub warning_delta: f64,
    pub drift_delta: f64,
    /// Disables warning/drift handling entirely when false.
    pub drift_detection: bool,
    pub base: HtConfig,
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            ensemble_size: 10,
            bagging: OnlineBagging::Poisson(6.0),
            warning_delta: 0.01,
            drift_delta: 0.001,
            drift_detection: true,
            base: HtConfig::default(),
            seed: 1,
        }
    }
}

impl EnsembleConfig {
    fn validate(&self) -> Result<(), LearnerError> {
        if self.ensemble_size == 0 {
            return Err(LearnerError::Config("ensemble size must be at least 1".into()));
        }
        if let OnlineBagging::Poisson(lambda) = self.bagging {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(LearnerError::Config(format!("λ must be positive, got {lambda}")));
            }
        }
        for (name, d) in [("warning", self.warning_delta), ("drift", self.drift_delta)] {
            if !(d > 0.0 && d < 1.0) {
                return Err(LearnerError::Config(format!("{name} delta must be in (0,1), got {d}")));
            }
        }
        self.base.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArfConfig {
    pub ensemble: EnsembleConfig,
    /// Attributes considered per split evaluation; `None` means ⌊√m⌋ + 1.
    pub feature_subset_size: Option<usize>,
}

impl ArfConfig {
    pub fn new(ensemble_size: usize, seed: u64) -> Self {
        Self {
            ensemble: EnsembleConfig {
                ensemble_size,
                seed,
                ..EnsembleConfig::default()
            },
            feature_subset_size: None,
        }
    }
}

impl Default for ArfConfig {
    fn default() -> Self {
        Self::new(10, 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrpConfig {
    pub ensemble: EnsembleConfig,
    /// Each tree trains on ⌈fraction · m⌉ attributes.
    pub subspace_fraction: f64,
}

impl SrpConfig {
    pub fn new(ensemble_size: usize, seed: u64) -> Self {
        Self {
            ensemble: EnsembleConfig {
                ensemble_size,
                seed,
                ..EnsembleConfig::default()
            },
            subspace_fraction: 0.6,
        }
    }
}

impl Default for SrpConfig {
    fn default() -> Self {
        Self::new(10, 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    /// Random attribute subset of this size at every split evaluation.
    Arf { subset: usize },
    /// Fixed random subspace of this size per tree.
    Srp { subspace: usize },
}

/// A member replacement triggered by its drift detector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replacement {
    pub member: usize,
    /// Training call (1-based) at which the drift was signalled.
    pub at: u64,
    pub from_background: bool,
    /// SRP only: attributes of the outgoing and incoming trees.
    pub old_subspace: Option<Vec<usize>>,
    pub new_subspace: Option<Vec<usize>>,
}

#[derive(Debug)]
struct Shared {
    schema: Arc<Schema>,
    cfg: EnsembleConfig,
    kind: EnsembleKind,
}

#[derive(Debug, Clone)]
struct Base {
    tree: HoeffdingTree,
    subspace: Option<Vec<usize>>,
}

type Projected = SmallVec<[f64; 16]>;

impl Base {
    fn fresh(shared: &Shared, rng: &mut StreamRng) -> Self {
        let m = shared.schema.num_attributes();
        match shared.kind {
            EnsembleKind::Arf { subset } => {
                let mut tree = HoeffdingTree::new(shared.cfg.base.clone(), shared.schema.clone())
                    .expect("validated configuration");
                if subset < m {
                    tree = tree.with_feature_sampler(FeatureSampler::new(
                        subset,
                        rng::seeded(rng.random()),
                    ));
                }
                Base {
                    tree,
                    subspace: None,
                }
            }
            EnsembleKind::Srp { subspace } => {
                let indices = rng::sample_indices(m, subspace, rng);
                let schema = Arc::new(shared.schema.project(&indices));
                let tree = HoeffdingTree::new(shared.cfg.base.clone(), schema)
                    .expect("validated configuration");
                Base {
                    tree,
                    subspace: Some(indices),
                }
            }
        }
    }

    fn project(&self, x: &[f64]) -> Option<Projected> {
        self.subspace
            .as_ref()
            .map(|idx| idx.iter().map(|&i| x[i]).collect())
    }

    fn predict(&self, x: &[f64], out: &mut [f64]) {
        match self.project(x) {
            Some(p) => self.tree.predict_x(&p, out),
            None => self.tree.predict_x(x, out),
        }
    }

    fn learn(&mut self, x: &[f64], label: usize, weight: f64) {
        match self.project(x) {
            Some(p) => self.tree.learn(&p, label, weight),
            None => self.tree.learn(x, label, weight),
        }
    }
}

/// One ensemble slot: the voting tree, its optional background tree and its
/// detectors. Members share nothing mutable, so they can be trained on
/// different threads.
#[derive(Debug, Clone)]
pub struct Member {
    index: usize,
    shared: Arc<Shared>,
    active: Base,
    background: Option<Base>,
    warning: Adwin,
    drift: Adwin,
    rng: StreamRng,
    seen: u64,
    replacements: Vec<Replacement>,
    scratch: Vec<f64>,
}

impl Member {
    fn new(index: usize, shared: Arc<Shared>) -> Self {
        let mut rng = rng::split(shared.cfg.seed, index as u64 + 1);
        let active = Base::fresh(&shared, &mut rng);
        let warning = Adwin::with_delta(shared.cfg.warning_delta).expect("validated");
        let drift = Adwin::with_delta(shared.cfg.drift_delta).expect("validated");
        let classes = shared.schema.num_classes();
        Self {
            index,
            shared,
            active,
            background: None,
            warning,
            drift,
            rng,
            seen: 0,
            replacements: Vec::new(),
            scratch: vec![0.0; classes],
        }
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn tree(&self) -> &HoeffdingTree {
        &self.active.tree
    }

    pub fn has_background(&self) -> bool {
        self.background.is_some()
    }

    /// Attributes of the voting tree (SRP only).
    pub fn subspace(&self) -> Option<&[usize]> {
        self.active.subspace.as_deref()
    }

    pub fn replacements(&self) -> &[Replacement] {
        &self.replacements
    }

    pub fn predict_proba_into(&self, x: &[f64], out: &mut [f64]) {
        self.active.predict(x, out);
    }

    /// Trains on an already validated instance.
    pub fn learn(&mut self, x: &[f64], label: usize, weight: f64) {
        let mut scratch = std::mem::take(&mut self.scratch);
        self.active.predict(x, &mut scratch);
        self.learn_predicted(x, label, weight, &scratch);
        self.scratch = scratch;
    }

    /// [`learn`](Self::learn) given this member's current prediction for `x`.
    fn learn_predicted(&mut self, x: &[f64], label: usize, weight: f64, predicted: &[f64]) {
        self.seen += 1;
        let correct = argmax(predicted) == label;

        let k = match self.shared.cfg.bagging {
            OnlineBagging::Poisson(lambda) => rng::poisson(lambda, &mut self.rng),
            OnlineBagging::Off => 1,
        };
        if k > 0 {
            let w = weight * f64::from(k);
            self.active.learn(x, label, w);
            if let Some(bg) = self.background.as_mut() {
                bg.learn(x, label, w);
            }
        }

        if !self.shared.cfg.drift_detection {
            return;
        }
        if self.warning.update_bit(!correct).is_change() {
            if self.background.is_none() {
                self.background = Some(Base::fresh(&self.shared, &mut self.rng));
            }
            self.warning.reset();
        }
        if self.drift.update_bit(!correct).is_change() {
            let from_background = self.background.is_some();
            let incoming = match self.background.take() {
                Some(bg) => bg,
                None => Base::fresh(&self.shared, &mut self.rng),
            };
            let outgoing = std::mem::replace(&mut self.active, incoming);
            self.replacements.push(Replacement {
                member: self.index,
                at: self.seen,
                from_background,
                old_subspace: outgoing.subspace,
                new_subspace: self.active.subspace.clone(),
            });
            self.warning.reset();
            self.drift.reset();
        }
    }

    fn reset(&mut self) {
        *self = Member::new(self.index, self.shared.clone());
    }
}

/// Bagged tree ensemble; see [`AdaptiveRandomForest`] and
/// [`StreamingRandomPatches`].
#[derive(Debug, Clone)]
pub struct Ensemble {
    shared: Arc<Shared>,
    members: Vec<Member>,
}

pub type AdaptiveRandomForest = Ensemble;
pub type StreamingRandomPatches = Ensemble;

impl Ensemble {
    pub fn arf(cfg: ArfConfig, schema: Arc<Schema>) -> Result<Self, LearnerError> {
        let m = schema.num_attributes();
        let subset = match cfg.feature_subset_size {
            Some(0) => {
                return Err(LearnerError::Config("feature subset size must be at least 1".into()))
            }
            Some(k) => k,
            None => (m as f64).sqrt().floor() as usize + 1,
        };
        Self::build(cfg.ensemble, schema, EnsembleKind::Arf { subset })
    }

    pub fn srp(cfg: SrpConfig, schema: Arc<Schema>) -> Result<Self, LearnerError> {
        let f = cfg.subspace_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(LearnerError::Config(format!(
                "subspace fraction must be in (0,1], got {f}"
            )));
        }
        let m = schema.num_attributes();
        let subspace = ((f * m as f64).ceil() as usize).clamp(1, m.max(1));
        Self::build(cfg.ensemble, schema, EnsembleKind::Srp { subspace })
    }

    fn build(
        cfg: EnsembleConfig,
        schema: Arc<Schema>,
        kind: EnsembleKind,
    ) -> Result<Self, LearnerError> {
        cfg.validate()?;
        if schema.num_classes() < 2 {
            return Err(LearnerError::UnsupportedTask);
        }
        let shared = Arc::new(Shared { schema, cfg, kind });
        let members = (0..shared.cfg.ensemble_size)
            .map(|i| Member::new(i, shared.clone()))
            .collect();
        Ok(Self { shared, members })
    }

    pub fn kind(&self) -> EnsembleKind {
        self.shared.kind
    }

    pub fn config(&self) -> &EnsembleConfig {
        &self.shared.cfg
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.shared.schema
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn members_mut(&mut self) -> &mut [Member] {
        &mut self.members
    }

    /// All member replacements so far, grouped by member.
    pub fn replacements(&self) -> Vec<Replacement> {
        self.members
            .iter()
            .flat_map(|m| m.replacements.iter().cloned())
            .collect()
    }

    /// Checks an instance before it is handed to members.
    pub fn validate(&self, inst: &Instance) -> Result<usize, LearnerError> {
        check_labeled(
            inst,
            self.shared.schema.num_attributes(),
            self.shared.schema.num_classes(),
        )
    }

    /// Turns the sum of member votes into the ensemble distribution.
    pub fn combine(votes: &[f64], out: &mut [f64]) {
        normalize_or_uniform(votes, out);
    }
}

impl Classifier for Ensemble {
    fn num_classes(&self) -> usize {
        self.shared.schema.num_classes()
    }

    fn predict_proba_into(&self, inst: &Instance, out: &mut [f64]) {
        let mut votes = SmallVec::<[f64; 8]>::from_elem(0.0, out.len());
        let mut member_out = SmallVec::<[f64; 8]>::from_elem(0.0, out.len());
        for m in &self.members {
            m.predict_proba_into(&inst.x, &mut member_out);
            for (v, p) in votes.iter_mut().zip(&member_out) {
                *v += p;
            }
        }
        Self::combine(&votes, out);
    }

    fn train(&mut self, inst: &Instance) -> Result<(), LearnerError> {
        let label = self.validate(inst)?;
        for m in &mut self.members {
            m.learn(&inst.x, label, inst.weight);
        }
        Ok(())
    }

    fn test_then_train(&mut self, inst: &Instance, out: &mut [f64]) -> Result<(), LearnerError> {
        let label = match inst.label() {
            Some(_) => Some(self.validate(inst)?),
            None => None,
        };
        let mut votes = SmallVec::<[f64; 8]>::from_elem(0.0, out.len());
        let mut member_out = SmallVec::<[f64; 8]>::from_elem(0.0, out.len());
        for m in &mut self.members {
            m.predict_proba_into(&inst.x, &mut member_out);
            for (v, p) in votes.iter_mut().zip(&member_out) {
                *v += p;
            }
            if let Some(label) = label {
                m.learn_predicted(&inst.x, label, inst.weight, &member_out);
            }
        }
        Self::combine(&votes, out);
        Ok(())
    }

    fn reset(&mut self) {
        for m in &mut self.members {
            m.reset();
        }
    }

    fn name(&self) -> String {
        match self.shared.kind {
            EnsembleKind::Arf { .. } => "ARF".into(),
            EnsembleKind::Srp { .. } => "SRP".into(),
        }
    }
}
