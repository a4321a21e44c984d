//! Reproducible random streams.
//!
//! Each `(seed, scenario, k, replication)` coordinate maps to its own
//! ChaCha20 stream: key from the seed and scenario, 64-bit stream id from
//! `k` and the replication. ChaCha20 keystreams for distinct keys or
//! stream ids are independent for all practical purposes.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// Generator recorded alongside persisted results.
pub const GENERATOR: &str = "chacha20/binq-v1";

const DOMAIN_TAG: &[u8; 8] = b"binq-v1\0";
const MAX_K: u64 = 1 << 48;
const MAX_REPLICATIONS: u64 = 1 << 16;

pub type Stream = ChaCha20Rng;

/// Stable 64-bit identifier of a scenario name (FNV-1a).
pub fn scenario_key(id: &str) -> u64 {
    id.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// The stream for one simulation coordinate. `k` is the sample size itself,
/// so streams do not move when a k-grid is refined.
pub fn derive_stream(seed: u64, scenario: u64, k: u64, replication: u64) -> Result<Stream> {
    if k >= MAX_K {
        return Err(Error::domain(format!("k={k} exceeds the stream coordinate range")));
    }
    if replication >= MAX_REPLICATIONS {
        return Err(Error::domain(format!(
            "replication index {replication} exceeds the stream coordinate range"
        )));
    }
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&scenario.to_le_bytes());
    key[16..24].copy_from_slice(DOMAIN_TAG);
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream((k << 16) | replication);
    Ok(rng)
}
