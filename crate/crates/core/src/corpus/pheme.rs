use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Class, Dataset, Example, Split};
use crate::error::{Error, Result};

/// The five main PHEME events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhemeEvent {
    GermanwingsCrash,
    CharlieHebdo,
    SydneySiege,
    Ferguson,
    OttawaShooting,
}

impl PhemeEvent {
    pub const ALL: [PhemeEvent; 5] = [
        PhemeEvent::GermanwingsCrash,
        PhemeEvent::CharlieHebdo,
        PhemeEvent::SydneySiege,
        PhemeEvent::Ferguson,
        PhemeEvent::OttawaShooting,
    ];

    /// Canonical tag stored on examples.
    pub fn slug(self) -> &'static str {
        match self {
            PhemeEvent::GermanwingsCrash => "germanwings-crash",
            PhemeEvent::CharlieHebdo => "charlie-hebdo",
            PhemeEvent::SydneySiege => "sydney-siege",
            PhemeEvent::Ferguson => "ferguson",
            PhemeEvent::OttawaShooting => "ottawa-shooting",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PhemeEvent::GermanwingsCrash => "Germanwings-crash",
            PhemeEvent::CharlieHebdo => "Charlie Hebdo",
            PhemeEvent::SydneySiege => "Sydney siege",
            PhemeEvent::Ferguson => "Ferguson",
            PhemeEvent::OttawaShooting => "Ottawa shooting",
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            PhemeEvent::GermanwingsCrash => "GC",
            PhemeEvent::CharlieHebdo => "CH",
            PhemeEvent::SydneySiege => "SS",
            PhemeEvent::Ferguson => "FE",
            PhemeEvent::OttawaShooting => "OS",
        }
    }

    /// Accepts slugs, display names, two-letter codes and the raw PHEME
    /// directory names (`charliehebdo-all-rnr-threads`), case-insensitively.
    pub fn parse(s: &str) -> Option<PhemeEvent> {
        let mut key: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        if let Some(stripped) = key.strip_suffix("allrnrthreads") {
            key = stripped.to_string();
        }
        Self::ALL.into_iter().find(|ev| {
            let slug: String = ev.slug().chars().filter(|c| c.is_alphanumeric()).collect();
            key == slug || key == ev.code().to_lowercase()
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Record {
    event: String,
    #[serde(deserialize_with = "id_as_string")]
    tweet_id: String,
    text: String,
    label: String,
}

fn id_as_string<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    match serde_json::Value::deserialize(d)? {
        serde_json::Value::String(s) => Ok(s),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(serde::de::Error::custom(format!("tweet_id must be a string or number, got {other}"))),
    }
}

fn record_to_example(rec: Record, line: usize) -> Result<Example> {
    let event = PhemeEvent::parse(&rec.event).ok_or_else(|| Error::Parse {
        line,
        message: format!("unknown event {:?}", rec.event),
    })?;
    let label: Class = rec.label.parse().map_err(|_| Error::Parse {
        line,
        message: format!("unknown label {:?}", rec.label),
    })?;
    let mut ex = Example::new(rec.tweet_id, rec.text, Some(label)).with_event(event.slug());
    ex.raw_label = Some(rec.label);
    Ok(ex)
}

/// Reads a normalized per-tweet PHEME file, either JSON lines with fields
/// `event`, `tweet_id`, `text`, `label` or TSV with those four columns in
/// that order (an `event\t...` header line is skipped).
pub fn parse_pheme(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_pheme(BufReader::new(file))
}

pub fn read_pheme<R: BufRead>(input: R) -> Result<Dataset> {
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
        let rec = if line.trim_start().starts_with('{') {
            serde_json::from_str::<Record>(line).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?
        } else {
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 4 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 4 tab-separated columns, found {}", cols.len()),
                });
            }
            if line_no == 1 && cols[0].eq_ignore_ascii_case("event") {
                continue;
            }
            Record {
                event: cols[0].to_string(),
                tweet_id: cols[1].to_string(),
                text: cols[2].to_string(),
                label: cols[3].to_string(),
            }
        };
        examples.push(record_to_example(rec, line_no)?);
    }
    if examples.is_empty() {
        return Err(Error::EmptyDataset("PHEME file has no records".into()));
    }
    Dataset::new(examples, Split::Train)
}

/// Writes `dataset` in the normalized JSON-lines format accepted by
/// [`read_pheme`]. Examples must carry an event tag and a label.
pub fn write_normalized_jsonl<W: Write>(dataset: &Dataset, mut out: W) -> Result<()> {
    for e in dataset.examples() {
        let event = e
            .event
            .clone()
            .ok_or_else(|| Error::Protocol(format!("example {:?} has no event tag", e.id)))?;
        let label = e
            .raw_label
            .clone()
            .or_else(|| e.label.map(|c| c.to_string()))
            .ok_or_else(|| Error::Protocol(format!("example {:?} has no label", e.id)))?;
        let rec = Record {
            event,
            tweet_id: e.id.clone(),
            text: e.text.clone(),
            label,
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n").map_err(|err| Error::io("<writer>", err))?;
    }
    Ok(())
}
