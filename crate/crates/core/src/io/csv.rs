use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use csv::{ReaderBuilder, StringRecord};

use super::{columns, file_opener, format_value, is_missing_token, memory_opener, Opener};
use crate::schema::{AttributeSpec, Instance, Schema, SchemaError, Task};
use crate::stream::{InstanceStream, StreamError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Index(usize),
    Name(String),
}

impl From<usize> for ColumnRef {
    fn from(i: usize) -> Self {
        ColumnRef::Index(i)
    }
}

impl From<&str> for ColumnRef {
    fn from(s: &str) -> Self {
        ColumnRef::Name(s.to_owned())
    }
}

/// A column read as nominal. With `values` the category order is fixed and
/// unlisted tokens are errors; without, categories are indexed by first
/// appearance in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NominalColumn {
    pub column: ColumnRef,
    pub values: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvOptions {
    pub header: bool,
    /// Defaults to the last column.
    pub target: Option<ColumnRef>,
    /// Nominal columns are only ever declared, never inferred. The target of a
    /// classification task is always nominal.
    pub nominal: Vec<NominalColumn>,
    pub task: Task,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            header: true,
            target: None,
            nominal: Vec::new(),
            task: Task::Classification,
        }
    }
}

impl CsvOptions {
    pub fn target(mut self, column: impl Into<ColumnRef>) -> Self {
        self.target = Some(column.into());
        self
    }

    pub fn nominal(mut self, column: impl Into<ColumnRef>) -> Self {
        self.nominal.push(NominalColumn {
            column: column.into(),
            values: None,
        });
        self
    }

    pub fn without_header(mut self) -> Self {
        self.header = false;
        self
    }

    /// Options that re-read a file written by [`write_csv`] for `schema` into
    /// the identical schema.
    pub fn for_schema(schema: &Schema) -> Self {
        let nominal = columns(schema)
            .filter_map(|spec| {
                spec.values().map(|values| NominalColumn {
                    column: ColumnRef::Name(spec.name().to_owned()),
                    values: Some(values.to_vec()),
                })
            })
            .collect();
        Self {
            header: true,
            target: Some(ColumnRef::Name(schema.target().name().to_owned())),
            nominal,
            task: schema.task(),
        }
    }
}

#[derive(Debug, Clone)]
enum ColumnKind {
    Numeric,
    Nominal {
        index: HashMap<String, usize>,
        order: Vec<String>,
        fixed: bool,
    },
}

impl ColumnKind {
    fn parse(&self, token: &str) -> Result<f64, String> {
        let token = token.trim();
        if is_missing_token(token) {
            return Ok(f64::NAN);
        }
        match self {
            ColumnKind::Numeric => token
                .parse::<f64>()
                .map_err(|_| format!("non-numeric token '{token}' in a numeric column")),
            ColumnKind::Nominal { index, .. } => index
                .get(token)
                .map(|&i| i as f64)
                .ok_or_else(|| format!("undeclared nominal value '{token}'")),
        }
    }
}

/// Column layout resolved by the first pass over the file.
#[derive(Debug, Clone)]
struct Layout {
    width: usize,
    target: usize,
    kinds: Vec<ColumnKind>,
}

impl Layout {
    fn to_instance(&self, record: &StringRecord, line: u64) -> Result<Instance, StreamError> {
        if record.len() != self.width {
            return Err(StreamError::Parse {
                line,
                message: format!(
                    "expected {} fields, found {}",
                    self.width,
                    record.len()
                ),
            });
        }
        let mut x = Vec::with_capacity(self.width - 1);
        let mut y = None;
        for (col, (token, kind)) in record.iter().zip(&self.kinds).enumerate() {
            let v = kind
                .parse(token)
                .map_err(|message| StreamError::Parse { line, message })?;
            if col == self.target {
                y = (!v.is_nan()).then_some(v);
            } else {
                x.push(v);
            }
        }
        Ok(Instance::new(x, y))
    }
}

/// A CSV snapshot as a restartable stream.
pub struct CsvSource {
    schema: Arc<Schema>,
    opener: Opener,
    layout: Layout,
    header: bool,
    reader: Option<csv::Reader<Box<dyn std::io::BufRead + Send>>>,
    record: StringRecord,
    position: u64,
}

impl std::fmt::Debug for CsvSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CsvSource")
            .field("schema", &self.schema)
            .field("position", &self.position)
            .finish()
    }
}

/// Reads CSV text from any byte reader. The input is buffered so the stream
/// can be restarted.
pub fn read_csv<R: Read>(source: R, options: &CsvOptions) -> Result<CsvSource, StreamError> {
    CsvSource::build(memory_opener(source)?, options)
}

impl CsvSource {
    pub fn open(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Self, StreamError> {
        let path = path.as_ref();
        // Surface a missing file as an I/O error before any parsing.
        std::fs::metadata(path)?;
        Self::build(file_opener(path), options)
    }

    fn reader(opener: &Opener) -> Result<csv::Reader<Box<dyn std::io::BufRead + Send>>, StreamError> {
        Ok(ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_reader(opener()?))
    }

    fn build(opener: Opener, options: &CsvOptions) -> Result<Self, StreamError> {
        let mut reader = Self::reader(&opener)?;
        let mut record = StringRecord::new();
        let mut rows = Vec::new();
        let mut header: Option<Vec<String>> = None;
        let mut width = None;

        // First pass: field counts and nominal dictionaries.
        while reader.read_record(&mut record).map_err(csv_error)? {
            let line = record.position().map_or(0, |p| p.line());
            match width {
                None => width = Some(record.len()),
                Some(w) if w != record.len() => {
                    return Err(StreamError::Parse {
                        line,
                        message: format!("expected {w} fields, found {}", record.len()),
                    })
                }
                _ => {}
            }
            if options.header && header.is_none() {
                header = Some(record.iter().map(|s| s.trim().to_owned()).collect());
                continue;
            }
            rows.push((line, record.clone()));
        }
        let width = width.ok_or_else(|| StreamError::Parse {
            line: 0,
            message: "empty file".into(),
        })?;
        if width < 1 {
            return Err(StreamError::Parse {
                line: 1,
                message: "no columns".into(),
            });
        }
        let names =
            header.unwrap_or_else(|| (0..width).map(|i| format!("attr{i}")).collect());
        let resolve = |c: &ColumnRef| -> Result<usize, StreamError> {
            match c {
                ColumnRef::Index(i) if *i < width => Ok(*i),
                ColumnRef::Index(i) => Err(parse_err(format!("column {i} out of range"))),
                ColumnRef::Name(n) if !options.header => Err(parse_err(format!(
                    "column '{n}' referenced by name but the file has no header"
                ))),
                ColumnRef::Name(n) => names
                    .iter()
                    .position(|h| h == n)
                    .ok_or_else(|| parse_err(format!("no column named '{n}'"))),
            }
        };
        let target = match &options.target {
            Some(c) => resolve(c)?,
            None => width - 1,
        };

        let mut declared: Vec<Option<Option<Vec<String>>>> = vec![None; width];
        for n in &options.nominal {
            declared[resolve(&n.column)?] = Some(n.values.clone());
        }
        if options.task == Task::Classification && declared[target].is_none() {
            declared[target] = Some(None);
        }
        let mut kinds: Vec<ColumnKind> = declared
            .into_iter()
            .map(|d| match d {
                None => ColumnKind::Numeric,
                Some(values) => {
                    let fixed = values.is_some();
                    let order = values.unwrap_or_default();
                    let index = order.iter().enumerate().map(|(i, v)| (v.clone(), i)).collect();
                    ColumnKind::Nominal {
                        index,
                        order,
                        fixed,
                    }
                }
            })
            .collect();
        for (line, row) in &rows {
            for (token, kind) in row.iter().zip(kinds.iter_mut()) {
                let token = token.trim();
                if is_missing_token(token) {
                    continue;
                }
                match kind {
                    ColumnKind::Numeric => {
                        token.parse::<f64>().map_err(|_| StreamError::Parse {
                            line: *line,
                            message: format!("non-numeric token '{token}' in a numeric column"),
                        })?;
                    }
                    ColumnKind::Nominal {
                        index,
                        order,
                        fixed,
                    } => {
                        if !index.contains_key(token) {
                            if *fixed {
                                return Err(StreamError::Parse {
                                    line: *line,
                                    message: format!("undeclared nominal value '{token}'"),
                                });
                            }
                            index.insert(token.to_owned(), order.len());
                            order.push(token.to_owned());
                        }
                    }
                }
            }
        }

        let spec = |col: usize| -> Result<AttributeSpec, StreamError> {
            Ok(match &kinds[col] {
                ColumnKind::Numeric => AttributeSpec::numeric(names[col].clone()),
                ColumnKind::Nominal { order, .. } => {
                    AttributeSpec::nominal(names[col].clone(), order.clone()).map_err(schema_err)?
                }
            })
        };
        let attributes = (0..width)
            .filter(|&c| c != target)
            .map(spec)
            .collect::<Result<Vec<_>, _>>()?;
        let schema = Schema::new(attributes, spec(target)?, options.task).map_err(schema_err)?;

        let layout = Layout {
            width,
            target,
            kinds,
        };
        Ok(Self {
            schema: Arc::new(schema),
            opener,
            layout,
            header: options.header,
            reader: None,
            record: StringRecord::new(),
            position: 0,
        })
    }
}

fn parse_err(message: String) -> StreamError {
    StreamError::Parse { line: 0, message }
}

fn schema_err(e: SchemaError) -> StreamError {
    parse_err(e.to_string())
}

fn csv_error(e: csv::Error) -> StreamError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => StreamError::Io(io),
        other => StreamError::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

impl InstanceStream for CsvSource {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn next_instance(&mut self) -> Result<Option<Instance>, StreamError> {
        if self.reader.is_none() {
            let mut reader = Self::reader(&self.opener)?;
            if self.header {
                reader.read_record(&mut self.record).map_err(csv_error)?;
            }
            self.reader = Some(reader);
        }
        let reader = self.reader.as_mut().expect("reader opened above");
        if !reader.read_record(&mut self.record).map_err(csv_error)? {
            return Ok(None);
        }
        let line = self.record.position().map_or(0, |p| p.line());
        let inst = self.layout.to_instance(&self.record, line)?;
        self.position += 1;
        Ok(Some(inst))
    }

    fn restart(&mut self) -> Result<(), StreamError> {
        self.reader = None;
        self.position = 0;
        Ok(())
    }

    fn position(&self) -> u64 {
        self.position
    }
}

/// Writes a header row and one row per instance; the target is the last
/// column. Missing values are written as empty fields.
pub fn write_csv<'a, W: Write>(
    schema: &Schema,
    instances: impl IntoIterator<Item = &'a Instance>,
    out: W,
) -> Result<(), StreamError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns(schema).map(AttributeSpec::name))
        .map_err(csv_error)?;
    let mut row: Vec<String> = Vec::with_capacity(schema.num_attributes() + 1);
    for inst in instances {
        row.clear();
        for (spec, &v) in schema.attributes().iter().zip(&inst.x) {
            row.push(format_value(spec, v, ""));
        }
        row.push(format_value(schema.target(), inst.y.unwrap_or(f64::NAN), ""));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
