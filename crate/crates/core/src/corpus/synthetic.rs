//! Seeded toy corpus with a linearly separable token signal.

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Class, Dataset, Example, Split};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

const FAKE_CUES: [&str; 4] = ["hoax", "fabricated", "bogus", "rumour"];
const TRUE_CUES: [&str; 4] = ["confirmed", "official", "verified", "reported"];
const FILLER: [&str; 12] = [
    "the", "police", "city", "today", "said", "people", "news", "after", "video", "near", "breaking", "update",
];

/// `n` examples alternating Fake/True. Each text holds `len` tokens: two
/// class cues at random positions, the rest shared filler words.
pub fn synthetic_separable(n: usize, len: usize, seed: u64) -> Result<Dataset> {
    if n == 0 || len < 2 {
        return Err(Error::Config(format!("need n >= 1 and len >= 2, got n={n} len={len}")));
    }
    let mut rng = rng::stream(seed, Purpose::Synthetic, 0);
    let examples = (0..n)
        .map(|i| {
            let class = Class::ALL[i % 2];
            let cues = match class {
                Class::Fake => &FAKE_CUES,
                Class::True => &TRUE_CUES,
            };
            let mut words: Vec<&str> = (0..len - 2).map(|_| *FILLER.choose(&mut rng).unwrap()).collect();
            for _ in 0..2 {
                let at = rng.gen_range(0..=words.len());
                words.insert(at, cues.choose(&mut rng).unwrap());
            }
            Example::new(format!("syn{i}"), words.join(" "), Some(class))
        })
        .collect();
    Dataset::new(examples, Split::Train)
}
