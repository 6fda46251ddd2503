use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use serde::Serialize;

use super::Dataset;
use crate::error::{Error, Result};

/// Top-k tokens of one event by TF-IDF.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TfidfReport {
    pub event: String,
    pub ranked: Vec<(String, f64)>,
}

/// Per-event word relevance. Each tweet is a document within its event;
/// `tf` is the token's share of all tokens in the event and
/// `idf = ln(docs / df)` over that event's documents. Ties rank
/// lexicographically. Events without any tokens are skipped.
pub fn tfidf_top_words(dataset: &Dataset, k: usize) -> Result<Vec<TfidfReport>> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if let Some(e) = dataset.examples().iter().find(|e| e.event.is_none()) {
        return Err(Error::Protocol(format!("example {:?} has no event tag", e.id)));
    }
    let events = dataset.events();
    if events.is_empty() {
        return Err(Error::EmptyDataset("no events to rank".into()));
    }

    let mut reports = Vec::with_capacity(events.len());
    for event in events {
        let docs: Vec<&Vec<String>> = dataset
            .examples()
            .iter()
            .filter(|e| e.event.as_deref() == Some(event.as_str()))
            .map(|e| &e.tokens)
            .collect();
        let mut count: BTreeMap<&str, usize> = BTreeMap::new();
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        let mut total = 0usize;
        for doc in &docs {
            let mut seen = HashSet::new();
            for t in doc.iter() {
                *count.entry(t).or_default() += 1;
                total += 1;
                if seen.insert(t.as_str()) {
                    *df.entry(t).or_default() += 1;
                }
            }
        }
        if total == 0 {
            log::warn!("event {event:?} has no tokens; skipping TF-IDF");
            continue;
        }
        let n_docs = docs.len() as f64;
        let mut ranked: Vec<(String, f64)> = count
            .iter()
            .map(|(&t, &c)| {
                let tf = c as f64 / total as f64;
                let idf = (n_docs / df[t] as f64).ln();
                (t.to_string(), tf * idf)
            })
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(k);
        reports.push(TfidfReport { event, ranked });
    }
    Ok(reports)
}

/// CSV with columns `event,rank,token,score`; ranks start at 1.
pub fn write_tfidf_csv<W: Write>(reports: &[TfidfReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["event", "rank", "token", "score"])?;
    for r in reports {
        for (i, (tok, score)) in r.ranked.iter().enumerate() {
            w.write_record([r.event.as_str(), &(i + 1).to_string(), tok, &score.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
