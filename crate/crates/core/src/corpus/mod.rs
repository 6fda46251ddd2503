//! Corpus ingestion and preparation.
//!
//! Parsers produce fully labeled [`Dataset`]s. Preparation for a run is
//! then: [`build_vocab`] on the training side only, [`Dataset::encode`] every
//! split to fixed-length id sequences, and [`mask_labels`] on the training
//! split to simulate a partially labeled regime.

mod folds;
mod liar;
mod pheme;
mod synthetic;
mod tfidf;
mod tokenize;
mod vocab;

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index;
use serde::{Deserialize, Serialize};

pub use folds::{loeo_folds, Fold};
pub use liar::{binarize_liar_label, parse_liar, read_liar, LIAR_LABELS};
pub use pheme::{parse_pheme, read_pheme, write_normalized_jsonl, PhemeEvent};
pub use synthetic::synthetic_separable;
pub use tfidf::{tfidf_top_words, write_tfidf_csv, TfidfReport};
pub use tokenize::tokenize;
pub use vocab::{build_vocab, Vocabulary, PAD_ID, UNK_ID};

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

/// Binary class. Fake is index 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Class {
    Fake = 0,
    True = 1,
}

impl Class {
    pub const COUNT: usize = 2;
    pub const ALL: [Class; 2] = [Class::Fake, Class::True];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Class> {
        Self::ALL.get(i).copied()
    }

    pub fn other(self) -> Class {
        match self {
            Class::Fake => Class::True,
            Class::True => Class::Fake,
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Fake => "fake",
            Class::True => "true",
        })
    }
}

impl std::str::FromStr for Class {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fake" | "0" => Ok(Class::Fake),
            "true" | "1" => Ok(Class::True),
            _ => Err(Error::Label(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

/// One text record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
    /// Fixed-length ids after [`encode`]; empty before.
    pub token_ids: Vec<usize>,
    /// `None` when the label is hidden (or unknown).
    pub label: Option<Class>,
    pub event: Option<String>,
    /// Label string as it appeared in the source file.
    pub raw_label: Option<String>,
}

impl Example {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<Class>) -> Self {
        let text = text.into();
        Self {
            id: id.into(),
            tokens: tokenize(&text),
            text,
            token_ids: Vec::new(),
            label,
            event: None,
            raw_label: None,
        }
    }

    pub fn with_event(mut self, event: impl Into<String>) -> Self {
        self.event = Some(event.into());
        self
    }
}

/// A split of examples plus the bookkeeping of which ones carry labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    examples: Vec<Example>,
    labeled_ids: BTreeSet<String>,
    split: Split,
}

impl Dataset {
    /// Errors on duplicate example ids.
    pub fn new(examples: Vec<Example>, split: Split) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for ex in &examples {
            if !seen.insert(ex.id.as_str()) {
                return Err(Error::Protocol(format!("duplicate example id {:?}", ex.id)));
            }
        }
        let labeled_ids = examples
            .iter()
            .filter(|e| e.label.is_some())
            .map(|e| e.id.clone())
            .collect();
        Ok(Self {
            examples,
            labeled_ids,
            split,
        })
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn into_examples(self) -> Vec<Example> {
        self.examples
    }

    pub fn split(&self) -> Split {
        self.split
    }

    /// N.
    pub fn n_total(&self) -> usize {
        self.examples.len()
    }

    /// M.
    pub fn n_labeled(&self) -> usize {
        self.labeled_ids.len()
    }

    /// S.
    pub fn labeled_ids(&self) -> &BTreeSet<String> {
        &self.labeled_ids
    }

    pub fn class_count(&self) -> usize {
        Class::COUNT
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Labeled examples per class, indexed by [`Class::index`].
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for c in self.examples.iter().filter_map(|e| e.label) {
            counts[c.index()] += 1;
        }
        counts
    }

    /// Distinct event tags in order of first appearance.
    pub fn events(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for ev in self.examples.iter().filter_map(|e| e.event.as_ref()) {
            if !out.iter().any(|o| o == ev) {
                out.push(ev.clone());
            }
        }
        out
    }

    /// `(event, total, [fake, true])` per event, in order of first appearance.
    pub fn event_counts(&self) -> Vec<(String, usize, [usize; 2])> {
        self.events()
            .into_iter()
            .map(|ev| {
                let mut total = 0;
                let mut counts = [0; 2];
                for e in self.examples.iter().filter(|e| e.event.as_deref() == Some(&ev)) {
                    total += 1;
                    if let Some(c) = e.label {
                        counts[c.index()] += 1;
                    }
                }
                (ev, total, counts)
            })
            .collect()
    }

    /// Examples for which `keep` holds, as a new dataset with the given split.
    pub fn filter(&self, split: Split, mut keep: impl FnMut(&Example) -> bool) -> Dataset {
        let examples: Vec<Example> = self.examples.iter().filter(|e| keep(e)).cloned().collect();
        Dataset::new(examples, split).expect("subset of a valid dataset has unique ids")
    }

    /// Every example encoded against `vocab` to exactly `max_len` ids.
    pub fn encode(&self, vocab: &Vocabulary, max_len: usize) -> Result<Dataset> {
        if max_len == 0 {
            return Err(Error::Config("max_len must be at least 1".into()));
        }
        let examples = self.examples.iter().map(|e| encode(e, vocab, max_len)).collect();
        Ok(Dataset {
            examples,
            labeled_ids: self.labeled_ids.clone(),
            split: self.split,
        })
    }

    /// Keeps labels only on the examples whose id is in `ids`.
    pub fn with_labeled_ids(&self, ids: &BTreeSet<String>) -> Result<Dataset> {
        if self.split != Split::Train {
            return Err(Error::Protocol("only the training split may be label-masked".into()));
        }
        for id in ids {
            match self.examples.iter().find(|e| &e.id == id) {
                Some(e) if e.label.is_some() => {}
                Some(_) => return Err(Error::Protocol(format!("example {id:?} has no label to keep"))),
                None => return Err(Error::Protocol(format!("unknown example id {id:?}"))),
            }
        }
        let examples = self
            .examples
            .iter()
            .map(|e| {
                let mut e = e.clone();
                if !ids.contains(&e.id) {
                    e.label = None;
                }
                e
            })
            .collect();
        Dataset::new(examples, self.split)
    }
}

/// Maps the first `max_len` tokens to ids, right-padding with PAD.
pub fn encode(example: &Example, vocab: &Vocabulary, max_len: usize) -> Example {
    let mut ids: Vec<usize> = example.tokens.iter().take(max_len).map(|t| vocab.id(t)).collect();
    ids.resize(max_len, PAD_ID);
    Example {
        token_ids: ids,
        ..example.clone()
    }
}

/// How many labels survive masking `n_total` examples at `ratio`.
pub fn labeled_count(n_total: usize, ratio: f64) -> usize {
    ((ratio * n_total as f64).round() as usize).max(1)
}

/// Hides labels on all but a seeded random subset of the training split.
///
/// `M = max(1, round(ratio * N))` examples keep their labels, drawn
/// uniformly without replacement from the labeled examples. With
/// `stratified`, each class keeps `round(ratio * N_c)` (at least one
/// overall) instead.
pub fn mask_labels(dataset: &Dataset, ratio: f64, seed: u64, stratified: bool) -> Result<Dataset> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::Config(format!("labeled ratio {ratio} outside (0, 1]")));
    }
    if dataset.split != Split::Train {
        return Err(Error::Protocol(format!(
            "{:?} split is never label-masked",
            dataset.split
        )));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyDataset("nothing to mask".into()));
    }
    let mut rng = rng::stream(seed, Purpose::Mask, 0);
    let pool: Vec<usize> = (0..dataset.examples.len())
        .filter(|&i| dataset.examples[i].label.is_some())
        .collect();

    let mut chosen: Vec<usize> = Vec::new();
    if stratified {
        let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); Class::COUNT];
        for &i in &pool {
            per_class[dataset.examples[i].label.unwrap().index()].push(i);
        }
        let mut quotas: Vec<usize> = per_class
            .iter()
            .map(|members| (ratio * members.len() as f64).round() as usize)
            .collect();
        if quotas.iter().sum::<usize>() == 0 {
            let largest = (0..per_class.len()).max_by_key(|&c| per_class[c].len()).unwrap();
            quotas[largest] = 1;
        }
        for (members, quota) in per_class.iter().zip(quotas) {
            chosen.extend(index::sample(&mut rng, members.len(), quota).iter().map(|j| members[j]));
        }
    } else {
        let m = labeled_count(dataset.n_total(), ratio);
        if m > pool.len() {
            return Err(Error::Protocol(format!(
                "need {m} labeled examples but only {} carry labels",
                pool.len()
            )));
        }
        chosen.extend(index::sample(&mut rng, pool.len(), m).iter().map(|j| pool[j]));
    }

    let ids: BTreeSet<String> = chosen.into_iter().map(|i| dataset.examples[i].id.clone()).collect();
    dataset.with_labeled_ids(&ids)
}
