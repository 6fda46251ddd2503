#![allow(dead_code)]

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LIAR_GRADES: [&str; 6] = ["pants-fire", "false", "barely-true", "half-true", "mostly-true", "true"];

/// Published corpus sizes.
pub const LIAR_SPLITS: [(&str, usize); 3] = [("train.tsv", 10_269), ("valid.tsv", 1_284), ("test.tsv", 1_283)];

/// Per-event (slug, total, fake, true) counts of the rumour corpus.
pub const PHEME_EVENTS: [(&str, usize, usize, usize); 5] = [
    ("germanwings-crash", 3_920, 2_220, 1_700),
    ("charlie-hebdo", 34_236, 6_452, 27_784),
    ("sydney-siege", 21_837, 7_765, 14_072),
    ("ferguson", 21_658, 5_952, 15_706),
    ("ottawa-shooting", 10_848, 5_603, 5_245),
];

const FILLER: [&str; 10] = ["the", "police", "city", "said", "news", "after", "video", "people", "today", "report"];

fn sentence(r: &mut ChaCha8Rng, fake: bool, len: usize) -> String {
    let cue = if fake { ["hoax", "bogus", "fabricated"] } else { ["official", "confirmed", "verified"] };
    let mut words: Vec<&str> = (0..len).map(|_| *FILLER.choose(r).unwrap()).collect();
    words.push(cue.choose(r).unwrap());
    words.shuffle(r);
    words.join(" ")
}

/// LIAR-style TSV: id, six-grade label, statement, then metadata columns.
pub fn write_liar(path: &Path, n: usize, seed: u64) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut w = BufWriter::new(File::create(path).unwrap());
    for i in 0..n {
        let grade = LIAR_GRADES[r.gen_range(0..6)];
        let text = sentence(&mut r, grade != "true", 6);
        writeln!(w, "{i}.json\t{grade}\t{text}\teconomy\tspeaker\tjob\tstate\tparty").unwrap();
    }
    w.flush().unwrap();
}

/// Writes the three LIAR splits at full size into `dir`.
pub fn write_liar_corpus(dir: &Path, seed: u64) -> [PathBuf; 3] {
    LIAR_SPLITS
        .iter()
        .enumerate()
        .map(|(i, (name, n))| {
            let p = dir.join(name);
            write_liar(&p, *n, seed + i as u64);
            p
        })
        .collect::<Vec<_>>()
        .try_into()
        .unwrap()
}

/// Normalized JSONL with `per_event[i] = (slug, _, fake, true)` counts.
pub fn write_pheme(path: &Path, per_event: &[(&str, usize, usize, usize)], seed: u64) {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut w = BufWriter::new(File::create(path).unwrap());
    let mut id: u64 = 500_000_000_000;
    for &(event, _, fake, truth) in per_event {
        let mut labels: Vec<bool> = std::iter::repeat_n(true, fake).chain(std::iter::repeat_n(false, truth)).collect();
        labels.shuffle(&mut r);
        for is_fake in labels {
            id += 1;
            let text = sentence(&mut r, is_fake, 5);
            let label = if is_fake { "fake" } else { "true" };
            writeln!(w, r#"{{"event":"{event}","tweet_id":{id},"text":"{text}","label":"{label}"}}"#).unwrap();
        }
    }
    w.flush().unwrap();
}

/// A few dozen examples per event.
pub fn write_small_pheme(path: &Path, per_event: usize, seed: u64) {
    let counts: Vec<_> = PHEME_EVENTS.iter().map(|&(e, _, _, _)| (e, per_event, per_event / 2, per_event - per_event / 2)).collect();
    write_pheme(path, &counts, seed);
}

/// Options for a model small enough to train in seconds.
pub const TINY: &[&str] = &[
    "--epochs", "2", "--embed-dim", "6", "--max-len", "8", "--batch-size", "16", "--set", "shared_filters=3",
    "--set", "path_filters=3",
];

pub fn tdsl(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdsl"))
        .args(args)
        .current_dir(cwd)
        .env_remove("TDSL_SEED")
        .env_remove("RUST_LOG")
        .output()
        .expect("running tdsl")
}

pub fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}
