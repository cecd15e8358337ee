//! File snapshots of streams: dense CSV and the dense ARFF subset.
//!
//! Both readers keep a way to reopen their input so that `restart` replays the
//! file from the top. Byte readers are buffered in memory; paths are reopened.

mod arff;
mod csv;

use std::fs::File;
use std::io::{self, BufRead, BufReader, Cursor, Read};
use std::path::Path;
use std::sync::Arc;

pub use self::arff::{read_arff, read_arff_with_target, write_arff, ArffSource};
pub use self::csv::{read_csv, write_csv, ColumnRef, CsvOptions, CsvSource, NominalColumn};

use crate::schema::{AttributeSpec, Schema};

type Opener = Arc<dyn Fn() -> io::Result<Box<dyn BufRead + Send>> + Send + Sync>;

fn memory_opener<R: Read>(mut source: R) -> io::Result<Opener> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let bytes: Arc<[u8]> = bytes.into();
    Ok(Arc::new(move || {
        Ok(Box::new(Cursor::new(bytes.clone())) as Box<dyn BufRead + Send>)
    }))
}

fn file_opener(path: &Path) -> Opener {
    let path = path.to_path_buf();
    Arc::new(move || {
        Ok(Box::new(BufReader::new(File::open(&path)?)) as Box<dyn BufRead + Send>)
    })
}

/// Missing markers accepted in both formats.
fn is_missing_token(token: &str) -> bool {
    token.is_empty() || token == "?"
}

/// Text form of one stored value. Numbers use the shortest representation
/// that parses back to the identical `f64`.
fn format_value(spec: &AttributeSpec, v: f64, missing: &str) -> String {
    if v.is_nan() {
        return missing.to_owned();
    }
    match spec.values() {
        Some(values) => values[v as usize].clone(),
        None => format!("{v}"),
    }
}

/// Columns of a schema in file order: attributes, then the target.
fn columns(schema: &Schema) -> impl Iterator<Item = &AttributeSpec> {
    schema
        .attributes()
        .iter()
        .chain(std::iter::once(schema.target()))
}
