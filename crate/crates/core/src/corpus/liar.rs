use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{Class, Dataset, Example, Split};
use crate::error::{Error, Result};

/// The six truthfulness grades of the LIAR distribution.
pub const LIAR_LABELS: [&str; 6] = ["true", "false", "half-true", "pants-fire", "barely-true", "mostly-true"];

/// `true` maps to True; every other grade counts as Fake.
pub fn binarize_liar_label(six_grade: &str) -> Result<Class> {
    let norm = six_grade.trim().to_ascii_lowercase();
    match norm.as_str() {
        "true" => Ok(Class::True),
        "false" | "half-true" | "pants-fire" | "barely-true" | "mostly-true" => Ok(Class::Fake),
        _ => Err(Error::Label(six_grade.to_string())),
    }
}

/// Reads a LIAR TSV file: column 1 is the statement id, column 2 the
/// six-grade label, column 3 the statement. Further columns (subject,
/// speaker, party, history counts, context) are ignored.
pub fn parse_liar(path: impl AsRef<Path>, split: Split) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_liar(BufReader::new(file), split)
}

pub fn read_liar<R: BufRead>(input: R, split: Split) -> Result<Dataset> {
    let mut examples = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected at least 3 tab-separated columns, found {}", cols.len()),
            });
        }
        let label = binarize_liar_label(cols[1]).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let mut ex = Example::new(cols[0].trim(), cols[2], Some(label));
        ex.raw_label = Some(cols[1].trim().to_string());
        examples.push(ex);
    }
    if examples.is_empty() {
        return Err(Error::EmptyDataset("LIAR file has no records".into()));
    }
    Dataset::new(examples, split)
}
