//! Flat `key = value` run configuration.
//!
//! Keys are the field names of [`RunConfig`] (training fields included).
//! Layers are merged in the order file, `TDSL_SEED`, command-line flags;
//! later layers win. Values are parsed according to the type of the
//! field's default, so `train_path = 123` stays a path.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};
use tdsl::{Class, TrainConfig};

pub const SEED_ENV: &str = "TDSL_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetKind {
    Liar,
    Pheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub dataset: DatasetKind,
    /// LIAR split files.
    pub train_path: Option<PathBuf>,
    pub valid_path: Option<PathBuf>,
    pub test_path: Option<PathBuf>,
    /// Normalized PHEME file (JSONL or TSV).
    pub pheme_path: Option<PathBuf>,
    /// PHEME event held out by `train`; the rest is training data.
    pub holdout_event: Option<String>,
    /// Labeled-id manifest from `split`; replaces random masking.
    pub labeled_manifest: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub n_runs: usize,
    pub positive_class: Class,
    pub min_count: usize,
    /// Worker threads for folds and sweep cells; 0 means one per core.
    pub workers: usize,
    pub top_k: usize,
    pub grid_labeled_ratio: Vec<f64>,
    pub grid_batch_size: Vec<usize>,
    pub grid_embed_dim: Vec<usize>,
    pub grid_learning_rate: Vec<f64>,
    #[serde(flatten)]
    pub train: TrainConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetKind::Liar,
            train_path: None,
            valid_path: None,
            test_path: None,
            pheme_path: None,
            holdout_event: None,
            labeled_manifest: None,
            out_dir: PathBuf::from("runs/latest"),
            n_runs: 1,
            positive_class: Class::Fake,
            min_count: 1,
            workers: 0,
            top_k: 50,
            grid_labeled_ratio: Vec::new(),
            grid_batch_size: Vec::new(),
            grid_embed_dim: Vec::new(),
            grid_learning_rate: Vec::new(),
            train: TrainConfig::default(),
        }
    }
}

/// Ordered `key -> raw value` pairs from one configuration layer.
pub type Layer = BTreeMap<String, String>;

pub fn parse_layer(text: &str, origin: &str) -> Result<Layer> {
    let mut layer = Layer::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("{origin}:{}: expected key = value, got {line:?}", i + 1);
        };
        layer.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(layer)
}

pub fn read_layer(path: &Path) -> Result<Layer> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_layer(&text, &path.display().to_string())
}

fn defaults() -> Map<String, Value> {
    match serde_json::to_value(RunConfig::default()).expect("config serializes") {
        Value::Object(m) => m,
        _ => unreachable!("config is a struct"),
    }
}

fn scalar(key: &str, raw: &str, like: &Value) -> Result<Value> {
    let number = || -> Option<Value> {
        if let Ok(u) = raw.parse::<u64>() {
            return Some(Value::from(u));
        }
        if let Ok(i) = raw.parse::<i64>() {
            return Some(Value::from(i));
        }
        raw.parse::<f64>().ok().and_then(Number::from_f64).map(Value::Number)
    };
    Ok(match like {
        Value::Number(_) => number().with_context(|| format!("{key}: {raw:?} is not a number"))?,
        Value::Bool(_) => match raw.to_ascii_lowercase().as_str() {
            "true" | "yes" | "1" => Value::Bool(true),
            "false" | "no" | "0" => Value::Bool(false),
            _ => bail!("{key}: {raw:?} is not a boolean"),
        },
        _ => Value::String(raw.to_string()),
    })
}

/// Merges layers (later wins) into a validated [`RunConfig`].
pub fn resolve(layers: &[Layer]) -> Result<RunConfig> {
    let mut merged = Layer::new();
    for layer in layers {
        merged.extend(layer.iter().map(|(k, v)| (k.clone(), v.clone())));
    }
    let mut obj = defaults();
    for (key, raw) in &merged {
        let Some(like) = obj.get(key).cloned() else {
            bail!("unknown config key {key:?}");
        };
        let value = if raw.is_empty() && !matches!(like, Value::String(_)) {
            if like.is_array() {
                Value::Array(Vec::new())
            } else {
                Value::Null
            }
        } else if like.is_array() {
            let items = raw
                .split(',')
                .map(|s| scalar(key, s.trim(), &Value::from(0)))
                .collect::<Result<Vec<_>>>()?;
            Value::Array(items)
        } else {
            scalar(key, raw, &like)?
        };
        obj.insert(key.clone(), value);
    }
    if !merged.contains_key("ramp_epochs") {
        let epochs = obj["epochs"].as_u64().unwrap_or(0);
        if epochs < obj["ramp_epochs"].as_u64().unwrap_or(0) {
            obj.insert("ramp_epochs".into(), Value::from(epochs));
        }
    }
    let config: RunConfig = serde_json::from_value(Value::Object(obj)).context("invalid configuration")?;
    config.validate()?;
    Ok(config)
}

/// The `TDSL_SEED` layer, if the variable is set.
pub fn env_layer() -> Result<Layer> {
    let mut layer = Layer::new();
    if let Ok(seed) = std::env::var(SEED_ENV) {
        seed.trim()
            .parse::<u64>()
            .with_context(|| format!("{SEED_ENV}={seed:?} is not an unsigned integer"))?;
        layer.insert("seed".into(), seed.trim().to_string());
    }
    Ok(layer)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        if self.n_runs == 0 {
            bail!("n_runs must be at least 1");
        }
        if self.min_count == 0 {
            bail!("min_count must be at least 1");
        }
        if self.top_k == 0 {
            bail!("top_k must be at least 1");
        }
        for (name, bad) in [
            ("grid_labeled_ratio", self.grid_labeled_ratio.iter().any(|&r| !(r > 0.0 && r <= 1.0))),
            ("grid_batch_size", self.grid_batch_size.contains(&0)),
            ("grid_embed_dim", self.grid_embed_dim.contains(&0)),
            ("grid_learning_rate", self.grid_learning_rate.iter().any(|&r| !(r > 0.0 && r.is_finite()))),
        ] {
            if bad {
                bail!("{name} has an out-of-range entry");
            }
        }
        Ok(())
    }

    /// Dataset files this config reads, checked for existence.
    pub fn require_inputs(&self, need_test: bool) -> Result<()> {
        let check = |key: &str, p: &Option<PathBuf>| -> Result<()> {
            match p {
                None => bail!("{key} is not set"),
                Some(p) if !p.is_file() => bail!("{key} {} does not exist", p.display()),
                Some(_) => Ok(()),
            }
        };
        match self.dataset {
            DatasetKind::Liar => {
                check("train_path", &self.train_path)?;
                if need_test {
                    check("test_path", &self.test_path)?;
                }
                if self.valid_path.is_some() {
                    check("valid_path", &self.valid_path)?;
                }
            }
            DatasetKind::Pheme => check("pheme_path", &self.pheme_path)?,
        }
        if self.labeled_manifest.is_some() {
            check("labeled_manifest", &self.labeled_manifest)?;
        }
        Ok(())
    }

    pub fn workers(&self) -> usize {
        if self.workers > 0 {
            self.workers
        } else {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        }
    }

    /// `key = value` lines, sorted by key; unset options are omitted.
    pub fn to_kv(&self) -> String {
        let Value::Object(obj) = serde_json::to_value(self).expect("config serializes") else {
            unreachable!("config is a struct")
        };
        let mut out = String::new();
        for (k, v) in obj {
            let text = match v {
                Value::Null => continue,
                Value::String(s) => s,
                Value::Array(items) => items.iter().map(Value::to_string).collect::<Vec<_>>().join(","),
                other => other.to_string(),
            };
            writeln!(out, "{k} = {text}").expect("writing to a String");
        }
        out
    }
}
