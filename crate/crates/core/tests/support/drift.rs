//! Behaviour across an abrupt concept inversion.

use std::sync::Arc;

use streamlearn::detectors::Adwin;
use streamlearn::evaluation::{prequential_run, MetricSnapshot, PrequentialOptions, WindowedEvaluator};
use streamlearn::generators::{DriftSpec, DriftStream, SeaConfig, SeaGenerator};
use streamlearn::learners::{argmax, Classifier, HoeffdingTree, HtConfig};
use streamlearn::pipeline::{DetectorInput, Element, Listener, Pipeline};
use streamlearn::{Instance, InstanceStream, Schema, StreamError};

pub const DRIFT_AT: u64 = 20_000;
pub const LENGTH: u64 = 40_000;
pub const WINDOW: usize = 1000;

/// Swaps the two labels of a binary stream.
pub struct Inverted<S>(pub S);

impl<S: InstanceStream> InstanceStream for Inverted<S> {
    fn schema(&self) -> &Arc<Schema> {
        self.0.schema()
    }

    fn next_instance(&mut self) -> Result<Option<Instance>, StreamError> {
        Ok(self.0.next_instance()?.map(|mut inst| {
            inst.y = inst.y.map(|y| 1.0 - y);
            inst
        }))
    }

    fn restart(&mut self) -> Result<(), StreamError> {
        self.0.restart()
    }

    fn position(&self) -> u64 {
        self.0.position()
    }
}

/// SEA function 1 whose labels invert at [`DRIFT_AT`].
pub fn inverting_sea(seed: u64) -> DriftStream {
    let before = SeaGenerator::new(SeaConfig::new(1).seed(seed)).unwrap();
    let after = Inverted(SeaGenerator::new(SeaConfig::new(1).seed(seed + 7919)).unwrap());
    DriftStream::new(
        vec![Box::new(before), Box::new(after)],
        vec![DriftSpec::abrupt(DRIFT_AT)],
        seed,
    )
    .unwrap()
}

/// Mean accuracy of the tumbling windows that end in `(from, to]`.
pub fn mean_accuracy(series: &[MetricSnapshot], from: u64, to: u64) -> f64 {
    let acc: Vec<f64> = series
        .iter()
        .filter(|s| s.position > from && s.position <= to)
        .filter_map(|s| s.accuracy)
        .collect();
    acc.iter().sum::<f64>() / acc.len() as f64
}

#[derive(Debug, Clone, Copy)]
pub struct Drop {
    pub before: f64,
    pub after: f64,
}

/// A tree trained up to the drift and frozen afterwards. `before` is the
/// mean windowed accuracy over the last 5 000 pre-drift instances, `after`
/// over the 10 000 instances following the first post-drift window.
pub fn frozen_learner_drop(seed: u64) -> Result<Drop, String> {
    let mut stream = inverting_sea(seed);
    let mut tree = HoeffdingTree::new(HtConfig::default(), stream.schema().clone())
        .map_err(|e| e.to_string())?;
    let mut window = WindowedEvaluator::new(2, WINDOW);
    let mut proba = [0.0; 2];
    for t in 0..LENGTH {
        let inst = stream.next_instance().map_err(|e| e.to_string())?.expect("endless");
        tree.predict_proba_into(&inst, &mut proba);
        let y = inst.label().expect("labeled");
        window.add(y, argmax(&proba));
        if t < DRIFT_AT {
            tree.train(&inst).map_err(|e| e.to_string())?;
        }
    }
    let series = window.series();
    let drop = Drop {
        before: mean_accuracy(series, DRIFT_AT - 5000, DRIFT_AT),
        after: mean_accuracy(series, DRIFT_AT + WINDOW as u64, DRIFT_AT + 11_000),
    };
    if drop.before - drop.after < 0.10 {
        return Err(format!("drop of only {:.1} pts: {drop:?}", 100.0 * (drop.before - drop.after)));
    }
    Ok(drop)
}

#[derive(Debug, Clone, Copy)]
pub struct Recovery {
    pub plateau: f64,
    /// End of the first post-drift window back within 3 pts of the plateau.
    pub recovered_at: Option<u64>,
    pub resets: u64,
}

fn recovery_of(series: &[MetricSnapshot], resets: u64) -> Recovery {
    let plateau = mean_accuracy(series, DRIFT_AT - 5000, DRIFT_AT);
    let recovered_at = series
        .iter()
        .filter(|s| s.position > DRIFT_AT)
        .find(|s| s.accuracy.is_some_and(|a| a >= plateau - 0.03))
        .map(|s| s.position);
    Recovery {
        plateau,
        recovered_at,
        resets,
    }
}

fn adwin_reset_pipeline(schema: &Arc<Schema>) -> Pipeline {
    let mut b = Pipeline::builder();
    b.add(Element::learner(HoeffdingTree::new(HtConfig::default(), schema.clone()).unwrap()));
    let detector = b.add(Element::detector(Adwin::default(), DetectorInput::LearnerError));
    b.subscribe(detector, Listener::ResetLearner);
    b.build().unwrap()
}

/// Pipeline `[HT, ADWIN on the error -> reset learner]`; passes when some
/// window ending within 10 000 instances of the drift is back within 3 pts
/// of the pre-drift plateau.
pub fn reset_listener_recovery(seed: u64) -> Result<Recovery, String> {
    let mut stream = inverting_sea(seed);
    let mut pipeline = adwin_reset_pipeline(stream.schema());
    let opts = PrequentialOptions::default().window(WINDOW).max_instances(LENGTH);
    let result = pipeline.run(&mut stream, &opts).map_err(|e| e.to_string())?;
    let r = recovery_of(&result.windowed, pipeline.learner_resets());
    match r.recovered_at {
        Some(at) if at <= DRIFT_AT + 10_000 => Ok(r),
        _ => Err(format!("no recovery within 10k instances: {r:?}")),
    }
}

/// The same stream through a bare tree, for comparison.
pub fn bare_tree_recovery(seed: u64) -> Recovery {
    let mut stream = inverting_sea(seed);
    let mut tree = HoeffdingTree::new(HtConfig::default(), stream.schema().clone()).unwrap();
    let opts = PrequentialOptions::default().window(WINDOW).max_instances(LENGTH);
    let result = prequential_run(&mut stream, &mut tree, &opts).unwrap();
    recovery_of(&result.windowed, 0)
}
