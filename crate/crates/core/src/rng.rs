//! Seed splitting for ensembles.
//!
//! A run is identified by `(master_seed, trial, lane)`. The master seed keys a
//! ChaCha8 generator, the trial index selects one of its 2^64 independent
//! streams, and the lane offsets the word position by `lane · 2^60`, so two
//! lanes of one trial cannot overlap unless a run draws more than 2^60 words.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const MAX_LANES: u8 = 16;

/// Generator for `(master, trial, lane)`. Panics if `lane >= MAX_LANES`.
pub fn split(master: u64, trial: u64, lane: u8) -> ChaCha8Rng {
    assert!(lane < MAX_LANES, "lane {lane} out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(trial);
    rng.set_word_pos(u128::from(lane) << 60);
    rng
}
