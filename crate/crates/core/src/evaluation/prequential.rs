use std::time::Instant;

use super::{ConfusionCounts, EvalError, MetricSnapshot, WindowedEvaluator};
use crate::learners::{argmax, Classifier, LearnerError};
use crate::schema::{Instance, Schema, Task};
use crate::stream::InstanceStream;

#[derive(Debug, Clone, PartialEq)]
pub struct PrequentialOptions {
    pub window: usize,
    pub max_instances: Option<u64>,
    /// Emit a windowed snapshot after every instance instead of every
    /// `window` instances.
    pub sliding: bool,
    /// Keep every first prediction in the result.
    pub record_predictions: bool,
}

impl Default for PrequentialOptions {
    fn default() -> Self {
        Self {
            window: WindowedEvaluator::DEFAULT_WINDOW,
            max_instances: None,
            sliding: false,
            record_predictions: false,
        }
    }
}

impl PrequentialOptions {
    pub fn max_instances(mut self, n: u64) -> Self {
        self.max_instances = Some(n);
        self
    }

    pub fn window(mut self, w: usize) -> Self {
        self.window = w;
        self
    }

    pub fn record_predictions(mut self) -> Self {
        self.record_predictions = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrequentialResult {
    pub learner: String,
    /// Instances consumed from the stream.
    pub instances: u64,
    /// `None` when nothing was evaluated.
    pub accuracy: Option<f64>,
    pub kappa: Option<f64>,
    pub confusion: ConfusionCounts,
    pub windowed: Vec<MetricSnapshot>,
    /// Seconds spent in the evaluation loop.
    pub wallclock_s: f64,
    pub predictions: Option<Vec<usize>>,
}

/// Cumulative and windowed accounting shared by every evaluation loop.
#[derive(Debug, Clone)]
pub struct Evaluator {
    classes: usize,
    cumulative: ConfusionCounts,
    windowed: WindowedEvaluator,
    instances: u64,
    predictions: Option<Vec<usize>>,
}

impl Evaluator {
    pub fn new(classes: usize, opts: &PrequentialOptions) -> Self {
        Self {
            classes,
            cumulative: ConfusionCounts::new(classes),
            windowed: WindowedEvaluator::new(classes, opts.window).sliding(opts.sliding),
            instances: 0,
            predictions: opts.record_predictions.then(Vec::new),
        }
    }

    /// Records a first prediction. Unlabeled instances are counted as
    /// consumed but not scored.
    pub fn record(&mut self, truth: Option<usize>, predicted: usize) -> Result<(), EvalError> {
        self.instances += 1;
        if let Some(p) = self.predictions.as_mut() {
            p.push(predicted);
        }
        if let Some(t) = truth {
            if t >= self.classes {
                return Err(EvalError::Learner(LearnerError::LabelOutOfRange {
                    label: t as f64,
                    classes: self.classes,
                }));
            }
            self.cumulative.add(t, predicted);
            self.windowed.add(t, predicted);
        }
        Ok(())
    }

    pub fn instances(&self) -> u64 {
        self.instances
    }

    pub fn cumulative(&self) -> &ConfusionCounts {
        &self.cumulative
    }

    pub fn windowed(&self) -> &WindowedEvaluator {
        &self.windowed
    }

    pub fn finish(self, learner: String, wallclock_s: f64) -> PrequentialResult {
        PrequentialResult {
            learner,
            instances: self.instances,
            accuracy: self.cumulative.accuracy(),
            kappa: self.cumulative.kappa(),
            confusion: self.cumulative,
            windowed: self.windowed.into_series(),
            wallclock_s,
            predictions: self.predictions,
        }
    }
}

pub(crate) fn check_classification(schema: &Schema, classes: usize) -> Result<(), EvalError> {
    if schema.task() != Task::Classification {
        return Err(EvalError::UnsupportedTask);
    }
    if schema.num_classes() != classes {
        return Err(EvalError::ClassMismatch {
            stream: schema.num_classes(),
            learner: classes,
        });
    }
    Ok(())
}

/// Test-then-train over `stream`: every instance is first predicted by the
/// current model, scored, and only then used for training.
pub fn prequential_run<S, C>(
    stream: &mut S,
    learner: &mut C,
    opts: &PrequentialOptions,
) -> Result<PrequentialResult, EvalError>
where
    S: InstanceStream + ?Sized,
    C: Classifier + ?Sized,
{
    let classes = learner.num_classes();
    check_classification(stream.schema(), classes)?;
    let mut eval = Evaluator::new(classes, opts);
    let mut proba = vec![0.0; classes];
    let limit = opts.max_instances.unwrap_or(u64::MAX);

    let start = Instant::now();
    while eval.instances() < limit {
        let Some(inst) = stream.next_instance()? else {
            break;
        };
        step(learner, &inst, &mut proba, &mut eval)?;
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(eval.finish(learner.name(), elapsed))
}

fn step<C: Classifier + ?Sized>(
    learner: &mut C,
    inst: &Instance,
    proba: &mut [f64],
    eval: &mut Evaluator,
) -> Result<(), EvalError> {
    learner.test_then_train(inst, proba)?;
    eval.record(inst.label(), argmax(proba))?;
    Ok(())
}
