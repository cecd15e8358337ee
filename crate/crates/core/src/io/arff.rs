use std::borrow::Cow;
use std::io::{BufRead, Read, Write};
use std::path::Path;
use std::sync::Arc;

use super::{columns, file_opener, format_value, memory_opener, Opener};
use crate::schema::{AttributeSpec, Instance, Schema, Task};
use crate::stream::{InstanceStream, StreamError};

/// An ARFF snapshot as a restartable stream.
pub struct ArffSource {
    schema: Arc<Schema>,
    opener: Opener,
    /// Column position of the target within a data row.
    target: usize,
    columns: Vec<AttributeSpec>,
    reader: Option<Box<dyn BufRead + Send>>,
    line: u64,
    buf: String,
    position: u64,
}

impl std::fmt::Debug for ArffSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ArffSource")
            .field("schema", &self.schema)
            .field("position", &self.position)
            .finish()
    }
}

/// Reads ARFF with the last attribute as the target.
pub fn read_arff<R: Read>(source: R) -> Result<ArffSource, StreamError> {
    ArffSource::build(memory_opener(source)?, None)
}

/// Reads ARFF with the named attribute as the target.
pub fn read_arff_with_target<R: Read>(source: R, target: &str) -> Result<ArffSource, StreamError> {
    ArffSource::build(memory_opener(source)?, Some(target))
}

fn parse_error(line: u64, message: impl Into<String>) -> StreamError {
    StreamError::Parse {
        line,
        message: message.into(),
    }
}

fn unsupported(line: u64, what: &str) -> StreamError {
    parse_error(line, format!("unsupported ARFF feature: {what}"))
}

/// Resolves backslash escapes inside a quoted token.
fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            out.extend(chars.next());
        } else {
            out.push(c);
        }
    }
    out
}

/// Strips surrounding quotes; the flag tells whether the token was quoted.
fn unquote(token: &str) -> (Cow<'_, str>, bool) {
    let t = token.trim();
    let quoted = t.len() >= 2
        && ((t.starts_with('\'') && t.ends_with('\'')) || (t.starts_with('"') && t.ends_with('"')));
    if quoted {
        (Cow::Owned(unescape(&t[1..t.len() - 1])), true)
    } else {
        (Cow::Borrowed(t), false)
    }
}

/// Splits on commas outside single or double quotes.
fn split_fields(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut quote = None;
    let mut escaped = false;
    let mut start = 0;
    for (i, c) in line.char_indices() {
        if escaped {
            escaped = false;
            continue;
        }
        match (c, quote) {
            ('\\', Some(_)) => escaped = true,
            ('\'' | '"', None) => quote = Some(c),
            (c, Some(q)) if c == q => quote = None,
            (',', None) => {
                out.push(&line[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&line[start..]);
    out
}

/// Splits `@attribute <name> <type>` into name and type text.
fn split_declaration(rest: &str) -> Option<(String, &str)> {
    let rest = rest.trim_start();
    let first = rest.chars().next()?;
    if first == '\'' || first == '"' {
        let mut escaped = false;
        for (i, c) in rest.char_indices().skip(1) {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == first {
                return Some((unescape(&rest[1..i]), rest[i + 1..].trim()));
            }
        }
        None
    } else {
        let end = rest.find(char::is_whitespace)?;
        Some((rest[..end].to_owned(), rest[end..].trim()))
    }
}

fn parse_attribute(rest: &str, line: u64) -> Result<AttributeSpec, StreamError> {
    let (name, kind) =
        split_declaration(rest).ok_or_else(|| parse_error(line, "malformed @attribute"))?;
    if let Some(body) = kind.strip_prefix('{') {
        let body = body
            .strip_suffix('}')
            .ok_or_else(|| parse_error(line, "unterminated nominal value list"))?;
        let values: Vec<String> = split_fields(body)
            .into_iter()
            .map(|v| unquote(v).0.into_owned())
            .collect();
        return AttributeSpec::nominal(name, values).map_err(|e| parse_error(line, e.to_string()));
    }
    let keyword = kind.split_whitespace().next().unwrap_or("").to_ascii_lowercase();
    match keyword.as_str() {
        "numeric" | "real" | "integer" => Ok(AttributeSpec::numeric(name)),
        "string" | "date" | "relational" => Err(unsupported(line, &format!("{keyword} attributes"))),
        other => Err(unsupported(line, &format!("attribute type '{other}'"))),
    }
}

fn keyword(line: &str) -> Option<(String, &str)> {
    let rest = line.strip_prefix('@')?;
    let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
    Some((rest[..end].to_ascii_lowercase(), &rest[end..]))
}

impl ArffSource {
    pub fn open(path: impl AsRef<Path>, target: Option<&str>) -> Result<Self, StreamError> {
        let path = path.as_ref();
        std::fs::metadata(path)?;
        Self::build(file_opener(path), target)
    }

    fn build(opener: Opener, target: Option<&str>) -> Result<Self, StreamError> {
        let mut reader = opener()?;
        let mut relation = "stream".to_owned();
        let mut attrs = Vec::new();
        let mut buf = String::new();
        let mut line = 0u64;
        let mut saw_data = false;
        while reader.read_line(&mut buf)? > 0 {
            line += 1;
            let text = buf.trim();
            if text.is_empty() || text.starts_with('%') {
                buf.clear();
                continue;
            }
            match keyword(text) {
                Some((k, rest)) if k == "relation" => relation = unquote(rest).0.into_owned(),
                Some((k, rest)) if k == "attribute" => attrs.push(parse_attribute(rest, line)?),
                Some((k, _)) if k == "data" => {
                    saw_data = true;
                    break;
                }
                Some((k, _)) => return Err(unsupported(line, &format!("@{k}"))),
                None => return Err(parse_error(line, "expected a header declaration")),
            }
            buf.clear();
        }
        if !saw_data {
            return Err(parse_error(line, "missing @data section"));
        }
        if attrs.is_empty() {
            return Err(parse_error(line, "no attributes declared"));
        }
        let target_pos = match target {
            Some(name) => attrs
                .iter()
                .position(|a: &AttributeSpec| a.name() == name)
                .ok_or_else(|| parse_error(0, format!("no attribute named '{name}'")))?,
            None => attrs.len() - 1,
        };
        let columns = attrs.clone();
        let target_spec = attrs.remove(target_pos);
        let task = if target_spec.is_nominal() {
            Task::Classification
        } else {
            Task::Regression
        };
        let schema = Schema::new(attrs, target_spec, task)
            .map_err(|e| parse_error(0, e.to_string()))?
            .with_relation(relation);
        Ok(Self {
            schema: Arc::new(schema),
            opener,
            target: target_pos,
            columns,
            reader: None,
            line: 0,
            buf: String::new(),
            position: 0,
        })
    }

    /// Opens the input and skips past `@data`.
    fn seek_data(&mut self) -> Result<(), StreamError> {
        let mut reader = (self.opener)()?;
        self.line = 0;
        loop {
            self.buf.clear();
            if reader.read_line(&mut self.buf)? == 0 {
                break;
            }
            self.line += 1;
            if let Some((k, _)) = keyword(self.buf.trim()) {
                if k == "data" {
                    break;
                }
            }
        }
        self.reader = Some(reader);
        Ok(())
    }

    fn parse_row(&self, text: &str) -> Result<Instance, StreamError> {
        if text.starts_with('{') {
            return Err(unsupported(self.line, "sparse data rows"));
        }
        let fields = split_fields(text);
        if fields.len() != self.columns.len() {
            return Err(parse_error(
                self.line,
                format!("expected {} fields, found {}", self.columns.len(), fields.len()),
            ));
        }
        let mut x = Vec::with_capacity(self.columns.len() - 1);
        let mut y = None;
        for (col, (field, spec)) in fields.iter().zip(&self.columns).enumerate() {
            let (token, quoted) = unquote(field);
            let token = token.as_ref();
            let v = if token == "?" && !quoted {
                f64::NAN
            } else if spec.is_nominal() {
                spec.index_of(token).ok_or_else(|| {
                    parse_error(
                        self.line,
                        format!("value '{token}' not declared for attribute '{}'", spec.name()),
                    )
                })? as f64
            } else {
                token.parse::<f64>().map_err(|_| {
                    parse_error(self.line, format!("non-numeric token '{token}'"))
                })?
            };
            if col == self.target {
                y = (!v.is_nan()).then_some(v);
            } else {
                x.push(v);
            }
        }
        Ok(Instance::new(x, y))
    }
}

impl InstanceStream for ArffSource {
    fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    fn next_instance(&mut self) -> Result<Option<Instance>, StreamError> {
        if self.reader.is_none() {
            self.seek_data()?;
        }
        loop {
            self.buf.clear();
            let reader = self.reader.as_mut().expect("opened above");
            if reader.read_line(&mut self.buf)? == 0 {
                return Ok(None);
            }
            self.line += 1;
            let text = self.buf.trim();
            if text.is_empty() || text.starts_with('%') {
                continue;
            }
            let inst = self.parse_row(text)?;
            self.position += 1;
            return Ok(Some(inst));
        }
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

fn quote_if_needed(s: &str) -> String {
    let plain = !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | '\'' | '"' | '{' | '}' | '%' | '?' | '\\'));
    if plain {
        s.to_owned()
    } else {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

/// Writes the ARFF header for `schema` (target declared last) and one dense
/// row per instance.
pub fn write_arff<'a, W: Write>(
    schema: &Schema,
    instances: impl IntoIterator<Item = &'a Instance>,
    mut out: W,
) -> Result<(), StreamError> {
    writeln!(out, "@relation {}", quote_if_needed(schema.relation()))?;
    writeln!(out)?;
    for spec in columns(schema) {
        match spec.values() {
            None => writeln!(out, "@attribute {} numeric", quote_if_needed(spec.name()))?,
            Some(values) => {
                let list: Vec<String> = values.iter().map(|v| quote_if_needed(v)).collect();
                writeln!(
                    out,
                    "@attribute {} {{{}}}",
                    quote_if_needed(spec.name()),
                    list.join(",")
                )?;
            }
        }
    }
    writeln!(out)?;
    writeln!(out, "@data")?;
    let mut row = String::new();
    for inst in instances {
        row.clear();
        for (spec, &v) in schema.attributes().iter().zip(&inst.x) {
            row.push_str(&quote_value(spec, v));
            row.push(',');
        }
        row.push_str(&quote_value(schema.target(), inst.y.unwrap_or(f64::NAN)));
        writeln!(out, "{row}")?;
    }
    out.flush()?;
    Ok(())
}

fn quote_value(spec: &AttributeSpec, v: f64) -> String {
    let s = format_value(spec, v, "?");
    if spec.is_nominal() && !v.is_nan() {
        quote_if_needed(&s)
    } else {
        s
    }
}
