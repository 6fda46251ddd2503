use std::collections::HashMap;
use std::io::{BufRead, Write};

use super::{Dataset, Split};
use crate::error::{Error, Result};

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Token/id bijection with reserved PAD and UNK slots.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    token_to_id: HashMap<String, usize>,
    id_to_token: Vec<String>,
    min_count: usize,
}

impl Vocabulary {
    fn from_tokens(tokens: impl IntoIterator<Item = String>, min_count: usize) -> Self {
        let mut id_to_token = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
        id_to_token.extend(tokens);
        let token_to_id = id_to_token.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            token_to_id,
            id_to_token,
            min_count,
        }
    }

    /// Total size including PAD and UNK.
    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= 2
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    /// Id of `token`, or UNK.
    pub fn id(&self, token: &str) -> usize {
        match self.token_to_id.get(token) {
            Some(&id) if id > UNK_ID => id,
            _ => UNK_ID,
        }
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.id_to_token.get(id).map(String::as_str)
    }

    /// Tokens for `ids`, dropping PAD.
    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter()
            .filter(|&&id| id != PAD_ID)
            .map(|&id| self.token(id).unwrap_or(UNK_TOKEN).to_string())
            .collect()
    }

    /// One token per line in id order, starting with PAD and UNK.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for t in &self.id_to_token {
            writeln!(out, "{t}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            lines.push(line);
        }
        if lines.len() < 2 || lines[0] != PAD_TOKEN || lines[1] != UNK_TOKEN {
            return Err(Error::Parse {
                line: 1,
                message: "vocabulary file must start with <pad> and <unk>".into(),
            });
        }
        Ok(Self::from_tokens(lines.into_iter().skip(2), 1))
    }
}

/// Tokens seen at least `min_count` times get ids from 2 upward, most
/// frequent first, ties broken lexicographically.
pub fn build_vocab(datasets: &[&Dataset], min_count: usize) -> Result<Vocabulary> {
    if min_count == 0 {
        return Err(Error::Config("min_count must be at least 1".into()));
    }
    if let Some(d) = datasets.iter().find(|d| d.split() != Split::Train) {
        return Err(Error::Protocol(format!(
            "vocabulary must be built from training data, got {:?} split",
            d.split()
        )));
    }
    let mut freq: HashMap<&str, usize> = HashMap::new();
    for d in datasets {
        for tok in d.examples().iter().flat_map(|e| &e.tokens) {
            *freq.entry(tok.as_str()).or_default() += 1;
        }
    }
    if freq.is_empty() {
        return Err(Error::EmptyDataset("no tokens to build a vocabulary from".into()));
    }
    let mut entries: Vec<(&str, usize)> = freq
        .into_iter()
        .filter(|&(t, c)| c >= min_count && t != PAD_TOKEN && t != UNK_TOKEN)
        .collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Ok(Vocabulary::from_tokens(
        entries.into_iter().map(|(t, _)| t.to_string()),
        min_count,
    ))
}
