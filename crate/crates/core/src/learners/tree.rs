//! Hoeffding trees.
//!
//! One implementation serves both the classic Hoeffding tree and EFDT. They
//! differ only in when a leaf splits and in whether internal nodes keep
//! statistics so their split can be revisited.

use std::sync::Arc;

use super::split::{candidate_thresholds, entropy, hoeffding_bound, info_gain_from_entropy, info_gain_range};
use super::stats::AttributeObserver;
use super::{argmax, check_labeled, Classifier, LearnerError};
use crate::rng::{self, StreamRng};
use crate::schema::{Instance, Schema};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafPrediction {
    MajorityClass,
    NaiveBayes,
    /// Per leaf, whichever of majority class and naive Bayes has been more
    /// accurate on the instances the leaf has seen.
    NaiveBayesAdaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitCriterion {
    InfoGain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeVariant {
    Hoeffding,
    /// Extremely Fast Decision Tree: eager splits, revisited internal nodes.
    Efdt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HtConfig {
    pub grace_period: f64,
    pub split_confidence: f64,
    pub tie_threshold: f64,
    pub leaf_prediction: LeafPrediction,
    pub split_criterion: SplitCriterion,
    pub numeric_estimator_bins: usize,
    pub min_branch_fraction: f64,
}

impl Default for HtConfig {
    fn default() -> Self {
        Self {
            grace_period: 200.0,
            split_confidence: 1e-7,
            tie_threshold: 0.05,
            leaf_prediction: LeafPrediction::NaiveBayesAdaptive,
            split_criterion: SplitCriterion::InfoGain,
            numeric_estimator_bins: 10,
            min_branch_fraction: 0.01,
        }
    }
}

impl HtConfig {
    pub fn validate(&self) -> Result<(), LearnerError> {
        if !(self.split_confidence > 0.0 && self.split_confidence < 1.0) {
            return Err(LearnerError::Config(format!(
                "split confidence must be in (0,1), got {}",
                self.split_confidence
            )));
        }
        if !(self.tie_threshold >= 0.0) {
            return Err(LearnerError::Config("tie threshold must be non-negative".into()));
        }
        if !(self.grace_period > 0.0) {
            return Err(LearnerError::Config("grace period must be positive".into()));
        }
        if self.numeric_estimator_bins == 0 {
            return Err(LearnerError::Config("need at least one numeric split candidate".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitTest {
    /// `x <= threshold` goes to branch 0, otherwise branch 1.
    Numeric { attribute: usize, threshold: f64 },
    /// One branch per category.
    Nominal { attribute: usize },
}

impl SplitTest {
    pub fn attribute(&self) -> usize {
        match *self {
            SplitTest::Numeric { attribute, .. } | SplitTest::Nominal { attribute } => attribute,
        }
    }

    fn branch(&self, x: &[f64]) -> Option<usize> {
        let v = x[self.attribute()];
        if v.is_nan() {
            return None;
        }
        Some(match *self {
            SplitTest::Numeric { threshold, .. } => usize::from(v > threshold),
            SplitTest::Nominal { .. } => v as usize,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeEvent {
    /// `at` counts training calls on the tree, starting at 1.
    Split { at: u64, depth: usize, test: SplitTest },
    /// An EFDT internal node discarded its subtree.
    Revision { at: u64, depth: usize, old: SplitTest },
}

/// Draws a fresh attribute subset at every split evaluation.
#[derive(Debug, Clone)]
pub struct FeatureSampler {
    pub size: usize,
    rng: StreamRng,
}

impl FeatureSampler {
    pub fn new(size: usize, rng: StreamRng) -> Self {
        Self { size, rng }
    }
}

#[derive(Debug, Clone)]
struct Suggestion {
    test: Option<SplitTest>,
    merit: f64,
    post: Vec<Vec<f64>>,
}

/// Statistics of a leaf (and of EFDT internal nodes).
#[derive(Debug, Clone)]
struct NodeStats {
    /// Distribution used for prediction; seeded from the parent's split
    /// estimate when the leaf is created.
    class_counts: Vec<f64>,
    /// `ln` of each class count.
    ln_counts: Vec<f64>,
    /// Class weights observed since creation.
    seen: Vec<f64>,
    seen_total: f64,
    last_evaluation: f64,
    observers: Vec<AttributeObserver>,
    mc_correct: f64,
    nb_correct: f64,
}

impl NodeStats {
    fn new(layout: &Layout, class_counts: Vec<f64>) -> Self {
        Self {
            ln_counts: class_counts.iter().map(|c| c.ln()).collect(),
            class_counts,
            seen: vec![0.0; layout.classes],
            seen_total: 0.0,
            last_evaluation: 0.0,
            observers: layout
                .cardinalities
                .iter()
                .map(|&card| {
                    if card == 0 {
                        AttributeObserver::numeric(layout.classes)
                    } else {
                        AttributeObserver::nominal(card, layout.classes)
                    }
                })
                .collect(),
            mc_correct: 0.0,
            nb_correct: 0.0,
        }
    }

    fn learn(&mut self, mode: LeafPrediction, x: &[f64], label: usize, weight: f64) {
        if mode == LeafPrediction::NaiveBayesAdaptive {
            if argmax(&self.class_counts) == label {
                self.mc_correct += weight;
            }
            if self.nb_argmax(x) == Some(label) {
                self.nb_correct += weight;
            }
        }
        self.class_counts[label] += weight;
        self.ln_counts[label] = self.class_counts[label].ln();
        self.seen[label] += weight;
        self.seen_total += weight;
        for (obs, &v) in self.observers.iter_mut().zip(x) {
            obs.observe(v, label, weight);
        }
    }

    fn is_pure(&self) -> bool {
        self.seen.iter().filter(|&&w| w > 0.0).count() < 2
    }

    /// Unnormalised log posterior per class.
    fn nb_scores(&self, x: &[f64], out: &mut [f64]) {
        for (c, score) in out.iter_mut().enumerate() {
            let prior = self.class_counts[c];
            if prior <= 0.0 {
                *score = f64::NEG_INFINITY;
                continue;
            }
            let mut s = self.ln_counts[c];
            for (obs, &v) in self.observers.iter().zip(x) {
                if !v.is_nan() {
                    s += obs.ln_likelihood(v, c);
                }
            }
            *score = s;
        }
    }

    fn nb_argmax(&self, x: &[f64]) -> Option<usize> {
        let mut scores = smallvec::SmallVec::<[f64; 8]>::from_elem(0.0, self.class_counts.len());
        self.nb_scores(x, &mut scores);
        let best = argmax(&scores);
        (scores[best] > f64::NEG_INFINITY).then_some(best)
    }

    fn predict(&self, mode: LeafPrediction, x: &[f64], out: &mut [f64]) {
        let use_nb = match mode {
            LeafPrediction::MajorityClass => false,
            LeafPrediction::NaiveBayes => true,
            LeafPrediction::NaiveBayesAdaptive => self.mc_correct <= self.nb_correct,
        };
        if use_nb {
            self.nb_scores(x, out);
            let max = out.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max > f64::NEG_INFINITY {
                let mut total = 0.0;
                for s in out.iter_mut() {
                    *s = (*s - max).exp();
                    total += *s;
                }
                for s in out.iter_mut() {
                    *s /= total;
                }
                return;
            }
        }
        normalize_or_uniform(&self.class_counts, out);
    }
}

pub(crate) fn normalize_or_uniform(counts: &[f64], out: &mut [f64]) {
    let total: f64 = counts.iter().sum();
    if total > 0.0 {
        for (o, &c) in out.iter_mut().zip(counts) {
            *o = c / total;
        }
    } else {
        out.fill(1.0 / out.len() as f64);
    }
}

#[derive(Debug, Clone)]
struct SplitNode {
    test: SplitTest,
    children: Vec<Node>,
    /// Weight routed to each branch; missing values follow the heaviest.
    branch_weights: Vec<f64>,
    /// Kept by EFDT so the split can be re-evaluated.
    stats: Option<NodeStats>,
}

impl SplitNode {
    fn route(&self, x: &[f64]) -> usize {
        self.test
            .branch(x)
            .filter(|&b| b < self.children.len())
            .unwrap_or_else(|| argmax(&self.branch_weights))
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(Box<NodeStats>),
    Split(Box<SplitNode>),
}

#[derive(Debug, Clone)]
struct Layout {
    classes: usize,
    /// 0 for numeric attributes.
    cardinalities: Vec<usize>,
}

/// Per-call context shared down the recursion.
struct Ctx<'a> {
    cfg: &'a HtConfig,
    layout: &'a Layout,
    variant: TreeVariant,
    sampler: Option<&'a mut FeatureSampler>,
    at: u64,
    events: &'a mut Vec<TreeEvent>,
}

impl Ctx<'_> {
    fn candidates(&mut self) -> Vec<usize> {
        let m = self.layout.cardinalities.len();
        match self.sampler.as_deref_mut() {
            Some(s) if s.size < m => rng::sample_indices(m, s.size, &mut s.rng),
            _ => (0..m).collect(),
        }
    }

    fn bound(&self, n: f64) -> f64 {
        hoeffding_bound(info_gain_range(self.layout.classes), self.cfg.split_confidence, n)
            .unwrap_or(f64::INFINITY)
    }

    fn best_for_attribute(
        &self,
        stats: &NodeStats,
        pre_entropy: f64,
        attribute: usize,
    ) -> Option<Suggestion> {
        let classes = self.layout.classes;
        let min_frac = self.cfg.min_branch_fraction;
        match &stats.observers[attribute] {
            AttributeObserver::Numeric { per_class } => {
                let lo = per_class.iter().map(|e| e.min()).fold(f64::INFINITY, f64::min);
                let hi = per_class.iter().map(|e| e.max()).fold(f64::NEG_INFINITY, f64::max);
                if !(lo < hi) {
                    return None;
                }
                let mut best: Option<Suggestion> = None;
                let mut post = [vec![0.0; classes], vec![0.0; classes]];
                for threshold in candidate_thresholds(lo, hi, self.cfg.numeric_estimator_bins) {
                    for (c, est) in per_class.iter().enumerate() {
                        let below = est.weight_at_or_below(threshold);
                        post[0][c] = below;
                        post[1][c] = est.weight() - below;
                    }
                    let merit = info_gain_from_entropy(pre_entropy, &post, min_frac);
                    if best.as_ref().is_none_or(|b| merit > b.merit) {
                        best = Some(Suggestion {
                            test: Some(SplitTest::Numeric {
                                attribute,
                                threshold,
                            }),
                            merit,
                            post: post.to_vec(),
                        });
                    }
                }
                best
            }
            AttributeObserver::Nominal { counts, values, .. } => {
                let post: Vec<Vec<f64>> = (0..*values)
                    .map(|v| counts[v * classes..(v + 1) * classes].to_vec())
                    .collect();
                let merit = info_gain_from_entropy(pre_entropy, &post, min_frac);
                Some(Suggestion {
                    test: Some(SplitTest::Nominal { attribute }),
                    merit,
                    post,
                })
            }
        }
    }

    /// Best suggestion per candidate attribute, in candidate order.
    fn suggestions(&mut self, stats: &NodeStats) -> Vec<Suggestion> {
        let pre_entropy = entropy(&stats.seen);
        self.candidates()
            .into_iter()
            .filter_map(|a| self.best_for_attribute(stats, pre_entropy, a))
            .collect()
    }

    fn new_leaf(&self, class_counts: Vec<f64>) -> Node {
        Node::Leaf(Box::new(NodeStats::new(self.layout, class_counts)))
    }

    /// Split decision for a leaf. Returns the replacement node, if any.
    fn attempt_split(&mut self, stats: &mut NodeStats, depth: usize) -> Option<SplitNode> {
        if stats.is_pure() {
            return None;
        }
        let suggestions = self.suggestions(stats);
        // best attribute suggestion; ties keep the first
        let mut best: Option<&Suggestion> = None;
        for s in &suggestions {
            if best.is_none_or(|b| s.merit > b.merit) {
                best = Some(s);
            }
        }
        let best = best?;
        if !(best.merit > 0.0) {
            return None;
        }
        let bound = self.bound(stats.seen_total);
        let tie = self.cfg.tie_threshold;
        let split = match self.variant {
            TreeVariant::Hoeffding => {
                // runner-up is the best other attribute or not splitting (merit 0)
                let second = suggestions
                    .iter()
                    .filter(|s| !std::ptr::eq(*s, best))
                    .map(|s| s.merit)
                    .fold(0.0, f64::max);
                best.merit - second > bound || bound < tie
            }
            TreeVariant::Efdt => {
                let gain = best.merit;
                gain > bound || (bound < tie && gain > tie / 2.0)
            }
        };
        if !split {
            return None;
        }
        let test = best.test.expect("attribute suggestion");
        self.events.push(TreeEvent::Split {
            at: self.at,
            depth,
            test,
        });
        let children = best.post.iter().map(|d| self.new_leaf(d.clone())).collect();
        let branch_weights = best.post.iter().map(|d| d.iter().sum()).collect();
        Some(SplitNode {
            test,
            children,
            branch_weights,
            stats: None,
        })
    }

    /// EFDT: does the node's current split still hold up against the best
    /// alternative?
    fn revision_needed(&mut self, node: &SplitNode) -> bool {
        let stats = node.stats.as_ref().expect("EFDT node keeps statistics");
        if stats.is_pure() {
            return false;
        }
        let suggestions = self.suggestions(stats);
        let current_attr = node.test.attribute();
        let current = suggestions
            .iter()
            .find(|s| s.test.map(|t| t.attribute()) == Some(current_attr))
            .map(|s| s.merit)
            .or_else(|| {
                self.best_for_attribute(stats, entropy(&stats.seen), current_attr)
                    .map(|s| s.merit)
            })
            .unwrap_or(f64::NEG_INFINITY);
        // not splitting is a candidate with merit 0
        let mut best_merit = 0.0;
        let mut best_attr = None;
        for s in &suggestions {
            if s.merit > best_merit {
                best_merit = s.merit;
                best_attr = s.test.map(|t| t.attribute());
            }
        }
        if best_attr == Some(current_attr) {
            return false;
        }
        let delta = if current == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            best_merit - current
        };
        let bound = self.bound(stats.seen_total);
        let tie = self.cfg.tie_threshold;
        delta > bound || (bound < tie && delta > tie / 2.0)
    }

    fn train(&mut self, node: &mut Node, x: &[f64], label: usize, weight: f64, depth: usize) {
        let replacement = match node {
            Node::Leaf(stats) => {
                stats.learn(self.cfg.leaf_prediction, x, label, weight);
                if stats.seen_total - stats.last_evaluation < self.cfg.grace_period {
                    return;
                }
                stats.last_evaluation = stats.seen_total;
                let Some(mut split) = self.attempt_split(stats, depth) else {
                    return;
                };
                if self.variant == TreeVariant::Efdt {
                    let Node::Leaf(stats) = std::mem::replace(node, self.new_leaf(Vec::new())) else {
                        unreachable!()
                    };
                    split.stats = Some(*stats);
                }
                Node::Split(Box::new(split))
            }
            Node::Split(split) => {
                let mut revise = false;
                if let Some(stats) = split.stats.as_mut() {
                    stats.learn(self.cfg.leaf_prediction, x, label, weight);
                    if stats.seen_total - stats.last_evaluation >= self.cfg.grace_period {
                        stats.last_evaluation = stats.seen_total;
                        revise = self.revision_needed(split);
                    }
                }
                if !revise {
                    let b = split.route(x);
                    split.branch_weights[b] += weight;
                    self.train(&mut split.children[b], x, label, weight, depth + 1);
                    return;
                }
                self.events.push(TreeEvent::Revision {
                    at: self.at,
                    depth,
                    old: split.test,
                });
                let mut stats = split.stats.take().expect("checked above");
                match self.attempt_split(&mut stats, depth) {
                    Some(mut resplit) => {
                        resplit.stats = Some(stats);
                        Node::Split(Box::new(resplit))
                    }
                    None => Node::Leaf(Box::new(stats)),
                }
            }
        };
        *node = replacement;
    }
}

/// Incremental decision tree for classification.
#[derive(Debug, Clone)]
pub struct HoeffdingTree {
    cfg: HtConfig,
    variant: TreeVariant,
    schema: Arc<Schema>,
    layout: Layout,
    root: Node,
    sampler: Option<FeatureSampler>,
    instances_seen: u64,
    events: Vec<TreeEvent>,
}

impl HoeffdingTree {
    pub fn new(cfg: HtConfig, schema: Arc<Schema>) -> Result<Self, LearnerError> {
        Self::with_variant(cfg, schema, TreeVariant::Hoeffding)
    }

    pub fn efdt(cfg: HtConfig, schema: Arc<Schema>) -> Result<Self, LearnerError> {
        Self::with_variant(cfg, schema, TreeVariant::Efdt)
    }

    pub fn with_variant(
        cfg: HtConfig,
        schema: Arc<Schema>,
        variant: TreeVariant,
    ) -> Result<Self, LearnerError> {
        cfg.validate()?;
        let classes = schema.num_classes();
        if classes < 2 {
            return Err(LearnerError::UnsupportedTask);
        }
        let layout = Layout {
            classes,
            cardinalities: schema.attributes().iter().map(|a| a.cardinality()).collect(),
        };
        let root = Node::Leaf(Box::new(NodeStats::new(&layout, vec![0.0; classes])));
        Ok(Self {
            cfg,
            variant,
            schema,
            layout,
            root,
            sampler: None,
            instances_seen: 0,
            events: Vec::new(),
        })
    }

    /// Restricts every split evaluation to a fresh random attribute subset.
    pub fn with_feature_sampler(mut self, sampler: FeatureSampler) -> Self {
        self.sampler = Some(sampler);
        self
    }

    pub fn config(&self) -> &HtConfig {
        &self.cfg
    }

    pub fn variant(&self) -> TreeVariant {
        self.variant
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn events(&self) -> &[TreeEvent] {
        &self.events
    }

    pub fn instances_seen(&self) -> u64 {
        self.instances_seen
    }

    /// Test at the root, if it has split.
    pub fn root_split(&self) -> Option<SplitTest> {
        match &self.root {
            Node::Split(s) => Some(s.test),
            Node::Leaf(_) => None,
        }
    }

    pub fn num_revisions(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e, TreeEvent::Revision { .. }))
            .count()
    }

    /// Counts of (internal nodes, leaves).
    pub fn size(&self) -> (usize, usize) {
        fn walk(n: &Node, acc: &mut (usize, usize)) {
            match n {
                Node::Leaf(_) => acc.1 += 1,
                Node::Split(s) => {
                    acc.0 += 1;
                    s.children.iter().for_each(|c| walk(c, acc));
                }
            }
        }
        let mut acc = (0, 0);
        walk(&self.root, &mut acc);
        acc
    }

    pub fn depth(&self) -> usize {
        fn walk(n: &Node) -> usize {
            match n {
                Node::Leaf(_) => 0,
                Node::Split(s) => 1 + s.children.iter().map(walk).max().unwrap_or(0),
            }
        }
        walk(&self.root)
    }

    /// Trains on a raw feature vector.
    pub fn learn(&mut self, x: &[f64], label: usize, weight: f64) {
        if !(weight > 0.0) {
            return;
        }
        self.instances_seen += 1;
        let mut ctx = Ctx {
            cfg: &self.cfg,
            layout: &self.layout,
            variant: self.variant,
            sampler: self.sampler.as_mut(),
            at: self.instances_seen,
            events: &mut self.events,
        };
        ctx.train(&mut self.root, x, label, weight, 0);
    }

    /// Class distribution for a raw feature vector.
    pub fn predict_x(&self, x: &[f64], out: &mut [f64]) {
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf(stats) => {
                    stats.predict(self.cfg.leaf_prediction, x, out);
                    return;
                }
                Node::Split(split) => node = &split.children[split.route(x)],
            }
        }
    }
}

impl Classifier for HoeffdingTree {
    fn num_classes(&self) -> usize {
        self.layout.classes
    }

    fn predict_proba_into(&self, inst: &Instance, out: &mut [f64]) {
        self.predict_x(&inst.x, out);
    }

    fn train(&mut self, inst: &Instance) -> Result<(), LearnerError> {
        let label = check_labeled(inst, self.layout.cardinalities.len(), self.layout.classes)?;
        self.learn(&inst.x, label, inst.weight);
        Ok(())
    }

    fn reset(&mut self) {
        self.root = Node::Leaf(Box::new(NodeStats::new(
            &self.layout,
            vec![0.0; self.layout.classes],
        )));
        self.instances_seen = 0;
        self.events.clear();
    }
}
