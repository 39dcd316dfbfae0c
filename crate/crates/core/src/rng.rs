//! Seeded random streams.
//!
//! Every random draw in the crate goes through [`stream`], so a seed fully
//! determines an experiment. Replications derive their own seed from
//! `(base_seed, index)` with [`child_seed`]; the derivation does not depend on
//! the order in which replications are executed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Deterministic generator keyed by `seed`.
pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for replication `index` of a batch started from `base_seed`.
pub fn child_seed(base_seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(index.wrapping_add(1));
    rng.next_u64()
}
