//! Incremental machine learning on data streams.
//!
//! Streams yield [`Instance`]s one at a time under a fixed [`Schema`];
//! learners are trained test-then-train by the prequential evaluator, either
//! one instance at a time or in mini-batches across threads.

pub mod detectors;
pub mod evaluation;
pub mod generators;
pub mod io;
pub mod learners;
pub mod parallel;
pub mod pipeline;
pub mod rng;
pub mod schema;
pub mod stream;

pub use crate::schema::{AttributeKind, AttributeSpec, Instance, Schema, Task};
pub use crate::stream::{InstanceStream, MemoryStream, StreamError};
