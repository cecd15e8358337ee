//! Schemas and instances.
//!
//! A [`Schema`] fixes the attribute layout of a stream. Every [`Instance`]
//! stores its features densely as `f64`: numeric values as themselves and
//! nominal values as the category index. `NaN` is the missing-value marker.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttributeKind {
    Numeric,
    /// Category names in index order.
    Nominal(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributeSpec {
    name: String,
    kind: AttributeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Classification,
    Regression,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("nominal attribute '{0}' declares no values")]
    EmptyNominal(String),
    #[error("nominal attribute '{name}' declares '{value}' twice")]
    DuplicateValue { name: String, value: String },
    #[error("attribute name '{0}' is used more than once")]
    DuplicateName(String),
    #[error("classification target '{0}' must be nominal with at least two values")]
    BadClassTarget(String),
    #[error("regression target '{0}' must be numeric")]
    BadRegressionTarget(String),
}

impl AttributeSpec {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Numeric,
        }
    }

    pub fn nominal<S: Into<String>>(
        name: impl Into<String>,
        values: impl IntoIterator<Item = S>,
    ) -> Result<Self, SchemaError> {
        let name = name.into();
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err(SchemaError::EmptyNominal(name));
        }
        let mut seen = HashSet::new();
        for v in &values {
            if !seen.insert(v.as_str()) {
                return Err(SchemaError::DuplicateValue {
                    name,
                    value: v.clone(),
                });
            }
        }
        Ok(Self {
            name,
            kind: AttributeKind::Nominal(values),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &AttributeKind {
        &self.kind
    }

    pub fn is_nominal(&self) -> bool {
        matches!(self.kind, AttributeKind::Nominal(_))
    }

    /// Category names for nominal attributes, `None` for numeric ones.
    pub fn values(&self) -> Option<&[String]> {
        match &self.kind {
            AttributeKind::Nominal(v) => Some(v),
            AttributeKind::Numeric => None,
        }
    }

    /// Number of categories; 0 for numeric attributes.
    pub fn cardinality(&self) -> usize {
        self.values().map_or(0, <[String]>::len)
    }

    pub fn index_of(&self, value: &str) -> Option<usize> {
        self.values()?.iter().position(|v| v == value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    relation: String,
    attributes: Vec<AttributeSpec>,
    target: AttributeSpec,
    task: Task,
}

impl Schema {
    pub fn new(
        attributes: Vec<AttributeSpec>,
        target: AttributeSpec,
        task: Task,
    ) -> Result<Self, SchemaError> {
        match task {
            Task::Classification if target.cardinality() < 2 => {
                return Err(SchemaError::BadClassTarget(target.name));
            }
            Task::Regression if target.is_nominal() => {
                return Err(SchemaError::BadRegressionTarget(target.name));
            }
            _ => {}
        }
        let mut names = HashSet::new();
        for a in attributes.iter().chain(std::iter::once(&target)) {
            if !names.insert(a.name.as_str()) {
                return Err(SchemaError::DuplicateName(a.name.clone()));
            }
        }
        Ok(Self {
            relation: "stream".to_owned(),
            attributes,
            target,
            task,
        })
    }

    pub fn with_relation(mut self, relation: impl Into<String>) -> Self {
        self.relation = relation.into();
        self
    }

    pub fn relation(&self) -> &str {
        &self.relation
    }

    pub fn attributes(&self) -> &[AttributeSpec] {
        &self.attributes
    }

    pub fn num_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn target(&self) -> &AttributeSpec {
        &self.target
    }

    pub fn task(&self) -> Task {
        self.task
    }

    /// Number of class labels; 0 for regression schemas.
    pub fn num_classes(&self) -> usize {
        self.target.cardinality()
    }

    /// Schema over a subset of the attributes (same target), in the order given.
    pub fn project(&self, indices: &[usize]) -> Schema {
        Schema {
            relation: self.relation.clone(),
            attributes: indices.iter().map(|&i| self.attributes[i].clone()).collect(),
            target: self.target.clone(),
            task: self.task,
        }
    }

    /// Checks `inst` against every instance invariant. The report names the
    /// first violating attribute.
    pub fn validate(&self, inst: &Instance) -> Result<(), Violation> {
        if inst.x.len() != self.attributes.len() {
            return Err(Violation {
                attribute: None,
                kind: ViolationKind::Arity {
                    found: inst.x.len(),
                    expected: self.attributes.len(),
                },
            });
        }
        if !(inst.weight >= 0.0) {
            return Err(Violation {
                attribute: None,
                kind: ViolationKind::NegativeWeight(inst.weight),
            });
        }
        for (spec, &v) in self.attributes.iter().zip(&inst.x) {
            check_value(spec, v)?;
        }
        if let Some(y) = inst.y {
            check_value(&self.target, y)?;
        }
        Ok(())
    }
}

fn check_value(spec: &AttributeSpec, v: f64) -> Result<(), Violation> {
    if v.is_nan() {
        return Ok(());
    }
    let kind = match &spec.kind {
        AttributeKind::Numeric if v.is_infinite() => ViolationKind::NonFinite(v),
        AttributeKind::Numeric => return Ok(()),
        AttributeKind::Nominal(values) => {
            if v.fract() != 0.0 || v < 0.0 {
                ViolationKind::NonIntegralIndex(v)
            } else if v as usize >= values.len() {
                ViolationKind::NominalOutOfRange {
                    index: v as usize,
                    cardinality: values.len(),
                }
            } else {
                return Ok(());
            }
        }
    };
    Err(Violation {
        attribute: Some(spec.name.clone()),
        kind,
    })
}

/// Free-function form of [`Schema::validate`].
pub fn validate_instance(schema: &Schema, inst: &Instance) -> Result<(), Violation> {
    schema.validate(inst)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    Arity { found: usize, expected: usize },
    NegativeWeight(f64),
    NonFinite(f64),
    NonIntegralIndex(f64),
    NominalOutOfRange { index: usize, cardinality: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub attribute: Option<String>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::Arity { found, expected } => {
                write!(f, "arity mismatch ({found} ≠ {expected})")
            }
            ViolationKind::NegativeWeight(w) => write!(f, "negative weight {w}"),
            ViolationKind::NonFinite(v) => write!(f, "non-finite value {v}"),
            ViolationKind::NonIntegralIndex(v) => write!(f, "nominal index {v} is not integral"),
            ViolationKind::NominalOutOfRange { index, cardinality } => write!(
                f,
                "nominal index out of range ({index} ≥ {cardinality})"
            ),
        }?;
        if let Some(a) = &self.attribute {
            write!(f, " at attribute '{a}'")?;
        }
        Ok(())
    }
}

impl std::error::Error for Violation {}

/// One data point. `y` holds a class index (classification) or a real value
/// (regression); `None` means unlabeled.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub x: Vec<f64>,
    pub y: Option<f64>,
    pub weight: f64,
}

impl Instance {
    pub fn new(x: Vec<f64>, y: Option<f64>) -> Self {
        Self { x, y, weight: 1.0 }
    }

    pub fn labeled(x: Vec<f64>, label: usize) -> Self {
        Self::new(x, Some(label as f64))
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    /// Class index, if the target is present.
    pub fn label(&self) -> Option<usize> {
        self.y.filter(|y| !y.is_nan()).map(|y| y as usize)
    }

    pub fn is_missing(&self, attribute: usize) -> bool {
        self.x[attribute].is_nan()
    }
}
