//! Seeded random streams.
//!
//! Every stochastic decision in a run draws from a ChaCha8 stream derived
//! from the run seed and a purpose tag, so that initialization, dropout,
//! shuffling and label masking never share state and stay reproducible
//! across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// What a stream is used for. Distinct purposes never collide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Dropout = 2,
    Shuffle = 3,
    Mask = 4,
    Synthetic = 5,
}

/// Stream for `purpose`, sub-indexed by `index` (epoch, fold, ...).
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) ^ index);
    rng
}
