//! Stream-processing pipelines.
//!
//! A pipeline is an ordered list of elements: transformers rewrite the
//! instance, exactly one learner predicts and then trains on it, and
//! detectors watch either the learner's errors or a feature. When a detector
//! reports a change its signal is delivered to the subscribed listeners, in
//! the order they were registered, before the pipeline returns.

mod scaler;

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::detectors::{Detector, DetectorError};
use crate::evaluation::{check_classification, EvalError, Evaluator, PrequentialOptions, PrequentialResult};
use crate::learners::{argmax, Classifier, LearnerError};
use crate::schema::{Instance, Schema};
use crate::stream::InstanceStream;

pub use self::scaler::{Moments, Scaler};

/// A stateful instance-to-instance map.
pub trait Transformer: Send {
    fn transform(&mut self, inst: &Instance) -> Instance;

    /// Schema of the instances produced.
    fn output_schema(&self) -> Arc<Schema>;

    fn reset(&mut self) {}
}

/// Position of an element in its pipeline.
pub type ElementId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    Warning,
    Change,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DriftSignal {
    pub source: ElementId,
    /// Zero-based index of the instance that triggered the signal.
    pub position: u64,
    pub kind: SignalKind,
}

/// What a detector element observes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorInput {
    /// 1 when the learner's prediction for the instance was wrong, else 0.
    LearnerError,
    /// The value of a feature as it reaches the detector; must lie in [0, 1].
    Feature(usize),
}

pub enum Element {
    Transformer(Box<dyn Transformer>),
    Learner(Box<dyn Classifier>),
    Detector {
        detector: Box<dyn Detector>,
        input: DetectorInput,
        /// Kind of signal emitted when the detector reports a change.
        emits: SignalKind,
    },
}

impl Element {
    pub fn transformer(t: impl Transformer + 'static) -> Self {
        Element::Transformer(Box::new(t))
    }

    pub fn learner(l: impl Classifier + 'static) -> Self {
        Element::Learner(Box::new(l))
    }

    pub fn detector(d: impl Detector + 'static, input: DetectorInput) -> Self {
        Element::Detector {
            detector: Box::new(d),
            input,
            emits: SignalKind::Change,
        }
    }

    /// A detector whose changes are reported as warnings.
    pub fn warning_detector(d: impl Detector + 'static, input: DetectorInput) -> Self {
        Element::Detector {
            detector: Box::new(d),
            input,
            emits: SignalKind::Warning,
        }
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Transformer(_) => f.write_str("Transformer"),
            Element::Learner(l) => write!(f, "Learner({})", l.name()),
            Element::Detector { input, emits, .. } => {
                write!(f, "Detector({input:?}, {emits:?})")
            }
        }
    }
}

pub type Callback = Box<dyn FnMut(&DriftSignal) + Send>;

pub enum Listener {
    /// Reinitialises the learner element.
    ResetLearner,
    /// Logs the signal and keeps it in [`Pipeline::logged`].
    LogEvent,
    Callback(Callback),
}

impl fmt::Debug for Listener {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Listener::ResetLearner => f.write_str("ResetLearner"),
            Listener::LogEvent => f.write_str("LogEvent"),
            Listener::Callback(_) => f.write_str("Callback"),
        }
    }
}

/// Entries of the optional processing trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceEvent {
    InstanceStart(u64),
    Emitted(DriftSignal),
    Delivered { signal: DriftSignal, listener: usize },
    InstanceEnd(u64),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("a predictive pipeline needs exactly one learner element, found {0}")]
    LearnerCount(usize),
    #[error("element {0} does not exist")]
    UnknownElement(ElementId),
    #[error("element {0} is not a detector")]
    NotADetector(ElementId),
    #[error("detector {detector} watches learner errors but comes before the learner")]
    DetectorBeforeLearner { detector: ElementId },
    #[error("detector {detector} watches feature {feature}, which does not exist")]
    NoSuchFeature { detector: ElementId, feature: usize },
    #[error("detector {element}: {source}")]
    Detector {
        element: ElementId,
        source: DetectorError,
    },
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Debug, Default)]
pub struct PipelineBuilder {
    elements: Vec<Element>,
    listeners: Vec<(ElementId, Listener)>,
}

impl PipelineBuilder {
    pub fn add(&mut self, element: Element) -> ElementId {
        self.elements.push(element);
        self.elements.len() - 1
    }

    /// Subscribes `listener` to the signals of detector `source`.
    pub fn subscribe(&mut self, source: ElementId, listener: Listener) -> &mut Self {
        self.listeners.push((source, listener));
        self
    }

    pub fn build(self) -> Result<Pipeline, PipelineError> {
        let learners: Vec<ElementId> = self
            .elements
            .iter()
            .enumerate()
            .filter(|(_, e)| matches!(e, Element::Learner(_)))
            .map(|(i, _)| i)
            .collect();
        if learners.len() != 1 {
            return Err(PipelineError::LearnerCount(learners.len()));
        }
        let learner = learners[0];
        for (i, e) in self.elements.iter().enumerate() {
            if let Element::Detector {
                input: DetectorInput::LearnerError,
                ..
            } = e
            {
                if i < learner {
                    return Err(PipelineError::DetectorBeforeLearner { detector: i });
                }
            }
        }
        for (source, _) in &self.listeners {
            match self.elements.get(*source) {
                None => return Err(PipelineError::UnknownElement(*source)),
                Some(Element::Detector { .. }) => {}
                Some(_) => return Err(PipelineError::NotADetector(*source)),
            }
        }
        Ok(Pipeline {
            elements: self.elements,
            listeners: self.listeners,
            learner,
            position: 0,
            logged: Vec::new(),
            trace: None,
            resets: 0,
        })
    }
}

/// Result of pushing one instance through a pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub proba: Vec<f64>,
    pub predicted: usize,
    pub signals: Vec<DriftSignal>,
}

#[derive(Debug)]
pub struct Pipeline {
    elements: Vec<Element>,
    listeners: Vec<(ElementId, Listener)>,
    learner: ElementId,
    position: u64,
    logged: Vec<DriftSignal>,
    trace: Option<Vec<TraceEvent>>,
    resets: u64,
}

impl Pipeline {
    pub fn builder() -> PipelineBuilder {
        PipelineBuilder::default()
    }

    pub fn learner_id(&self) -> ElementId {
        self.learner
    }

    pub fn num_classes(&self) -> usize {
        self.learner().num_classes()
    }

    fn learner(&self) -> &dyn Classifier {
        match &self.elements[self.learner] {
            Element::Learner(l) => l.as_ref(),
            _ => unreachable!("learner index points at a learner"),
        }
    }

    /// Signals seen by [`Listener::LogEvent`] listeners.
    pub fn logged(&self) -> &[DriftSignal] {
        &self.logged
    }

    /// Number of learner resets triggered by listeners.
    pub fn learner_resets(&self) -> u64 {
        self.resets
    }

    /// Starts recording a [`TraceEvent`] log.
    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn trace(&self) -> &[TraceEvent] {
        self.trace.as_deref().unwrap_or(&[])
    }

    fn note(&mut self, e: TraceEvent) {
        if let Some(t) = self.trace.as_mut() {
            t.push(e);
        }
    }

    fn deliver(&mut self, signal: DriftSignal) {
        self.note(TraceEvent::Emitted(signal));
        for i in 0..self.listeners.len() {
            if self.listeners[i].0 != signal.source {
                continue;
            }
            match &mut self.listeners[i].1 {
                Listener::ResetLearner => {
                    if let Element::Learner(l) = &mut self.elements[self.learner] {
                        l.reset();
                    }
                    self.resets += 1;
                }
                Listener::LogEvent => {
                    log::info!(
                        "{:?} from element {} at instance {}",
                        signal.kind,
                        signal.source,
                        signal.position
                    );
                    self.logged.push(signal);
                }
                Listener::Callback(cb) => cb(&signal),
            }
            self.note(TraceEvent::Delivered {
                signal,
                listener: i,
            });
        }
    }

    /// Predicts `inst`, trains on it if labeled, and runs the detectors.
    /// All signals raised are delivered before this returns.
    pub fn process(&mut self, inst: &Instance) -> Result<Outcome, PipelineError> {
        let position = self.position;
        self.position += 1;
        self.note(TraceEvent::InstanceStart(position));

        let mut current = inst.clone();
        let mut proba = vec![0.0; self.num_classes()];
        let mut predicted = 0;
        let mut error = 0.0;
        let mut signals = Vec::new();

        for id in 0..self.elements.len() {
            let fired = match &mut self.elements[id] {
                Element::Transformer(t) => {
                    current = t.transform(&current);
                    None
                }
                Element::Learner(l) => {
                    l.test_then_train(&current, &mut proba)?;
                    predicted = argmax(&proba);
                    if let Some(y) = current.label() {
                        error = if y == predicted { 0.0 } else { 1.0 };
                    }
                    None
                }
                Element::Detector {
                    detector,
                    input,
                    emits,
                } => {
                    let value = match *input {
                        DetectorInput::LearnerError if current.label().is_none() => None,
                        DetectorInput::LearnerError => Some(error),
                        DetectorInput::Feature(f) => {
                            let v = *current.x.get(f).ok_or(PipelineError::NoSuchFeature {
                                detector: id,
                                feature: f,
                            })?;
                            (!v.is_nan()).then_some(v)
                        }
                    };
                    match value {
                        Some(v) => {
                            let report = detector
                                .update(v)
                                .map_err(|source| PipelineError::Detector { element: id, source })?;
                            report.is_change().then_some(*emits)
                        }
                        None => None,
                    }
                }
            };
            if let Some(kind) = fired {
                let signal = DriftSignal {
                    source: id,
                    position,
                    kind,
                };
                self.deliver(signal);
                signals.push(signal);
            }
        }
        self.note(TraceEvent::InstanceEnd(position));
        Ok(Outcome {
            proba,
            predicted,
            signals,
        })
    }

    /// Prequential evaluation of the pipeline over `stream`.
    pub fn run<S: InstanceStream + ?Sized>(
        &mut self,
        stream: &mut S,
        opts: &PrequentialOptions,
    ) -> Result<PrequentialResult, PipelineError> {
        let classes = self.num_classes();
        check_classification(stream.schema(), classes)?;
        let mut eval = Evaluator::new(classes, opts);
        let limit = opts.max_instances.unwrap_or(u64::MAX);
        let start = Instant::now();
        while eval.instances() < limit {
            let Some(inst) = stream.next_instance().map_err(EvalError::from)? else {
                break;
            };
            let out = self.process(&inst)?;
            eval.record(inst.label(), out.predicted)?;
        }
        let elapsed = start.elapsed().as_secs_f64();
        Ok(eval.finish(format!("Pipeline({})", self.learner().name()), elapsed))
    }
}
