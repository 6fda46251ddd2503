//! `tdsl`: corpus preparation, training, evaluation, leave-one-event-out
//! runs, TF-IDF statistics and hyperparameter sweeps.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Layer, RunConfig};

/// Failure caused by the invocation rather than the run (exit code 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "tdsl", version, about = "Two-path semi-supervised text classification")]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG takes precedence.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded labeled-id manifest for the training split.
    Split {
        #[command(flatten)]
        opts: RunOpts,
        /// Manifest path (default: <out_dir>/labeled_ids.txt).
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Train once and evaluate on the test split.
    Train {
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Evaluate a finished run directory on its (or another) test split.
    Eval {
        /// Run directory written by `train`.
        #[arg(long)]
        run: PathBuf,
        /// Report path (default: <run>/eval.json).
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Leave-one-event-out over a PHEME file.
    Loeo {
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Per-event TF-IDF top words of a PHEME file.
    Stats {
        #[command(flatten)]
        opts: RunOpts,
        /// CSV path (default: <out_dir>/tfidf.csv).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Grid over labeled_ratio x batch_size x embed_dim x learning_rate.
    Sweep {
        #[command(flatten)]
        opts: RunOpts,
    },
}

macro_rules! run_opts {
    ($( $(#[$doc:meta])* $field:ident => $key:literal ),* $(,)?) => {
        #[derive(Args, Default)]
        struct RunOpts {
            /// Flat key = value config file.
            #[arg(short, long)]
            config: Option<PathBuf>,
            /// Any config key (repeatable).
            #[arg(long = "set", value_name = "KEY=VALUE")]
            set: Vec<String>,
            $( $(#[$doc])* #[arg(long)] $field: Option<String>, )*
        }

        impl RunOpts {
            fn flag_layer(&self) -> anyhow::Result<Layer> {
                let mut layer = Layer::new();
                for kv in &self.set {
                    let Some((k, v)) = kv.split_once('=') else {
                        anyhow::bail!("--set expects KEY=VALUE, got {kv:?}");
                    };
                    layer.insert(k.trim().to_string(), v.trim().to_string());
                }
                $( if let Some(v) = &self.$field { layer.insert($key.to_string(), v.clone()); } )*
                Ok(layer)
            }
        }
    };
}

run_opts! {
    /// liar or pheme
    dataset => "dataset",
    train_path => "train_path",
    valid_path => "valid_path",
    test_path => "test_path",
    pheme_path => "pheme_path",
    holdout_event => "holdout_event",
    labeled_manifest => "labeled_manifest",
    out_dir => "out_dir",
    seed => "seed",
    epochs => "epochs",
    batch_size => "batch_size",
    /// Adam step size
    lr => "learning_rate",
    dropout_rate => "dropout_rate",
    embed_dim => "embed_dim",
    max_len => "max_len",
    labeled_ratio => "labeled_ratio",
    w_max => "w_max",
    ramp_epochs => "ramp_epochs",
    n_runs => "n_runs",
    /// fake or true
    positive_class => "positive_class",
    min_count => "min_count",
    workers => "workers",
    top_k => "top_k",
}

fn resolve(opts: &RunOpts, base: Option<Layer>) -> anyhow::Result<RunConfig> {
    let mut layers = Vec::new();
    layers.extend(base);
    if let Some(path) = &opts.config {
        layers.push(config::read_layer(path)?);
    }
    layers.push(config::env_layer()?);
    layers.push(opts.flag_layer()?);
    config::resolve(&layers)
}

fn run(command: Command) -> anyhow::Result<()> {
    let usage = |e: anyhow::Error| anyhow::anyhow!(UsageError(format!("{e:#}")));
    match command {
        Command::Split { opts, manifest } => commands::split(&resolve(&opts, None).map_err(usage)?, manifest),
        Command::Train { opts } => commands::train(&resolve(&opts, None).map_err(usage)?),
        Command::Eval { run, output, opts } => {
            let saved = config::read_layer(&run.join(output::CONFIG_FILE)).map_err(usage)?;
            commands::eval(&resolve(&opts, Some(saved)).map_err(usage)?, &run, output)
        }
        Command::Loeo { opts } => commands::loeo(&resolve(&opts, None).map_err(usage)?),
        Command::Stats { opts, output } => commands::stats(&resolve(&opts, None).map_err(usage)?, output),
        Command::Sweep { opts } => commands::sweep(&resolve(&opts, None).map_err(usage)?),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let is_usage = err.chain().any(|e| {
        e.downcast_ref::<UsageError>().is_some() || matches!(e.downcast_ref::<tdsl::Error>(), Some(tdsl::Error::Config(_)))
    });
    if is_usage {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
