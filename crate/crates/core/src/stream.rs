//! Pull-based instance streams.

use std::sync::Arc;

use thiserror::Error;

use crate::schema::{Instance, Schema, Violation};

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: instance violates schema: {violation}")]
    Invalid { line: u64, violation: Violation },
}

/// A producer of instances that all conform to one fixed schema.
///
/// `Ok(None)` is end-of-stream; synthetic streams never return it.
/// Streams are single-consumer: they may move between threads but are not
/// shared.
pub trait InstanceStream: Send {
    fn schema(&self) -> &Arc<Schema>;

    fn next_instance(&mut self) -> Result<Option<Instance>, StreamError>;

    /// Rewinds to the first instance. Seeded generators replay the identical
    /// sequence.
    fn restart(&mut self) -> Result<(), StreamError>;

    /// Number of instances emitted since construction or the last restart.
    fn position(&self) -> u64;
}

impl<S: InstanceStream + ?Sized> InstanceStream for Box<S> {
    fn schema(&self) -> &Arc<Schema> {
        (**self).schema()
    }
    fn next_instance(&mut self) -> Result<Option<Instance>, StreamError> {
        (**self).next_instance()
    }
    fn restart(&mut self) -> Result<(), StreamError> {
        (**self).restart()
    }
    fn position(&self) -> u64 {
        (**self).position()
    }
}

/// Replays a fixed list of instances.
#[derive(Debug, Clone)]
pub struct MemoryStream {
    schema: Arc<Schema>,
    instances: Arc<[Instance]>,
    position: usize,
}

impl MemoryStream {
    /// Fails with the first instance that does not validate.
    pub fn new(schema: Schema, instances: Vec<Instance>) -> Result<Self, StreamError> {
        for (i, inst) in instances.iter().enumerate() {
            schema
                .validate(inst)
                .map_err(|violation| StreamError::Invalid {
                    line: i as u64 + 1,
                    violation,
                })?;
        }
        Ok(Self {
            schema: Arc::new(schema),
            instances: instances.into(),
            position: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }
}

impl InstanceStream for MemoryStream {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn next_instance(&mut self) -> Result<Option<Instance>, StreamError> {
        let next = self.instances.get(self.position).cloned();
        if next.is_some() {
            self.position += 1;
        }
        Ok(next)
    }

    fn restart(&mut self) -> Result<(), StreamError> {
        self.position = 0;
        Ok(())
    }

    fn position(&self) -> u64 {
        self.position as u64
    }
}

/// Drains up to `limit` instances from `stream`.
pub fn take(
    stream: &mut dyn InstanceStream,
    limit: usize,
) -> Result<Vec<Instance>, StreamError> {
    let mut out = Vec::with_capacity(limit.min(1 << 20));
    while out.len() < limit {
        match stream.next_instance()? {
            Some(inst) => out.push(inst),
            None => break,
        }
    }
    Ok(out)
}
