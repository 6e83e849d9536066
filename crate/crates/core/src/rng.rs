//! Counter-style random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the master seed, with the
//! ChaCha stream id selecting an independent sequence. A stream depends only
//! on (seed, domain, index), never on the order in which work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamDomain {
    /// Draws shared by the k-th subject of every treatment.
    Matched = 1,
    /// Draws private to one subject id.
    Subject = 2,
    /// Replications of test and bootstrap harnesses.
    Replication = 3,
}

pub fn stream(seed: u64, domain: StreamDomain, index: u64) -> ChaCha8Rng {
    debug_assert!(index < 1 << 56);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((domain as u64) << 56) | index);
    rng
}
