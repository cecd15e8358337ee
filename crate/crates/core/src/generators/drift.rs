use std::sync::Arc;

use rand::Rng;

use super::GeneratorError;
use crate::rng::{self, StreamRng};
use crate::schema::{Instance, Schema};
use crate::stream::{InstanceStream, StreamError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftKind {
    Abrupt,
    Gradual,
}

/// A transition between two consecutive segments.
///
/// For abrupt drifts `position` is the index of the first instance drawn from
/// the next segment. For gradual drifts it is the centre of the transition and
/// `width` its length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSpec {
    pub kind: DriftKind,
    pub position: f64,
    pub width: f64,
}

impl DriftSpec {
    pub fn abrupt(position: u64) -> Self {
        Self {
            kind: DriftKind::Abrupt,
            position: position as f64,
            width: 0.0,
        }
    }

    pub fn gradual(start: u64, end: u64) -> Self {
        Self {
            kind: DriftKind::Gradual,
            position: (start as f64 + end as f64) / 2.0,
            width: end as f64 - start as f64,
        }
    }

    /// Index after which the drift is complete and the next segment is used
    /// exclusively.
    fn settled_after(&self) -> f64 {
        match self.kind {
            DriftKind::Abrupt => self.position,
            DriftKind::Gradual => self.position + self.width,
        }
    }
}

/// Probability of drawing from the post-drift concept at index `t`.
pub fn gradual_weight(t: f64, center: f64, width: f64) -> f64 {
    1.0 / (1.0 + (-4.0 * (t - center) / width).exp())
}

/// Element of an alternating stream/drift list.
pub enum DriftStreamPart {
    Stream(Box<dyn InstanceStream>),
    Drift(DriftSpec),
}

/// Concatenates segments with abrupt or gradual transitions between them.
pub struct DriftStream {
    segments: Vec<Box<dyn InstanceStream>>,
    drifts: Vec<DriftSpec>,
    seed: u64,
    rng: StreamRng,
    active: usize,
    position: u64,
    last_segment: usize,
}

impl std::fmt::Debug for DriftStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DriftStream")
            .field("segments", &self.segments.len())
            .field("drifts", &self.drifts)
            .field("position", &self.position)
            .finish()
    }
}

impl DriftStream {
    /// `seed` drives the segment choice inside gradual transitions.
    pub fn new(
        segments: Vec<Box<dyn InstanceStream>>,
        drifts: Vec<DriftSpec>,
        seed: u64,
    ) -> Result<Self, GeneratorError> {
        if segments.is_empty() {
            return Err(GeneratorError::Plan("no segments".into()));
        }
        if drifts.len() + 1 != segments.len() {
            return Err(GeneratorError::Plan(format!(
                "{} segments need {} drifts, got {}",
                segments.len(),
                segments.len() - 1,
                drifts.len()
            )));
        }
        let schema = segments[0].schema().clone();
        if let Some(i) = segments.iter().position(|s| **s.schema() != *schema) {
            return Err(GeneratorError::Plan(format!(
                "segment {i} has a different schema from segment 0"
            )));
        }
        for (i, d) in drifts.iter().enumerate() {
            if !(d.position > 0.0) {
                return Err(GeneratorError::Plan(format!("drift {i} must have a positive position")));
            }
            if d.kind == DriftKind::Gradual && !(d.width > 0.0) {
                return Err(GeneratorError::Plan(format!("gradual drift {i} needs a positive width")));
            }
            if i > 0 && d.position <= drifts[i - 1].position {
                return Err(GeneratorError::Plan("drift positions must increase".into()));
            }
        }
        Ok(Self {
            segments,
            drifts,
            seed,
            rng: rng::seeded(seed),
            active: 0,
            position: 0,
            last_segment: 0,
        })
    }

    /// Builds from an alternating list `[stream, drift, stream, ...]`.
    pub fn from_parts(parts: Vec<DriftStreamPart>, seed: u64) -> Result<Self, GeneratorError> {
        let mut segments = Vec::new();
        let mut drifts = Vec::new();
        for (i, part) in parts.into_iter().enumerate() {
            match (part, i % 2) {
                (DriftStreamPart::Stream(s), 0) => segments.push(s),
                (DriftStreamPart::Drift(d), 1) => drifts.push(d),
                (DriftStreamPart::Stream(_), _) => {
                    return Err(GeneratorError::Plan(format!(
                        "position {i}: expected a drift marker, found a stream"
                    )))
                }
                (DriftStreamPart::Drift(_), _) => {
                    return Err(GeneratorError::Plan(format!(
                        "position {i}: expected a stream, found a drift marker"
                    )))
                }
            }
        }
        if segments.len() == drifts.len() && !drifts.is_empty() {
            return Err(GeneratorError::Plan(format!(
                "position {}: drift marker has no stream after it",
                2 * drifts.len() - 1
            )));
        }
        Self::new(segments, drifts, seed)
    }

    pub fn drifts(&self) -> &[DriftSpec] {
        &self.drifts
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    /// Segment that produced the last emitted instance.
    pub fn last_segment(&self) -> usize {
        self.last_segment
    }
}

impl InstanceStream for DriftStream {
    fn schema(&self) -> &Arc<Schema> {
        self.segments[0].schema()
    }

    fn next_instance(&mut self) -> Result<Option<Instance>, StreamError> {
        let t = self.position as f64;
        while self.active < self.drifts.len() {
            let d = &self.drifts[self.active];
            let done = match d.kind {
                DriftKind::Abrupt => t >= d.position,
                DriftKind::Gradual => t > d.settled_after(),
            };
            if !done {
                break;
            }
            self.active += 1;
        }
        let mut segment = self.active;
        if let Some(d) = self.drifts.get(self.active) {
            if d.kind == DriftKind::Gradual {
                let p = gradual_weight(t, d.position, d.width);
                if self.rng.random::<f64>() < p {
                    segment += 1;
                }
            }
        }
        let inst = self.segments[segment].next_instance()?;
        if inst.is_some() {
            self.position += 1;
            self.last_segment = segment;
        }
        Ok(inst)
    }

    fn restart(&mut self) -> Result<(), StreamError> {
        for s in &mut self.segments {
            s.restart()?;
        }
        self.rng = rng::seeded(self.seed);
        self.active = 0;
        self.position = 0;
        self.last_segment = 0;
        Ok(())
    }

    fn position(&self) -> u64 {
        self.position
    }
}
