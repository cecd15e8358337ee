//! Prequential evaluation, metrics and reports.

mod confusion;
mod prequential;
pub mod report;
mod windowed;

use thiserror::Error;

use crate::learners::LearnerError;
use crate::stream::StreamError;

pub use self::confusion::ConfusionCounts;
pub(crate) use self::prequential::check_classification;
pub use self::prequential::{
    prequential_run, Evaluator, PrequentialOptions, PrequentialResult,
};
pub use self::windowed::{MetricSnapshot, WindowedEvaluator};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prequential evaluation needs a classification stream")]
    UnsupportedTask,
    #[error("stream has {stream} classes but the learner was built for {learner}")]
    ClassMismatch { stream: usize, learner: usize },
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
}
