//! Seed derivation and the generator used by every stochastic component.
//!
//! Runs own a ChaCha8 stream keyed by a SHA-256 digest of their identifying
//! parts, so a cell can be recomputed in isolation and the result does not
//! depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Rng = ChaCha8Rng;

/// Hashes an ordered list of byte strings into a 64-bit seed.
///
/// Parts are length-prefixed so `["ab", "c"]` and `["a", "bc"]` differ.
pub fn derive_seed<I, P>(parts: I) -> u64
where
    I: IntoIterator<Item = P>,
    P: AsRef<[u8]>,
{
    let mut hasher = Sha256::new();
    for part in parts {
        let part = part.as_ref();
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn seeds_are_stable_and_prefix_free() {
        let a = derive_seed(["ab", "c"]);
        let b = derive_seed(["a", "bc"]);
        assert_ne!(a, b);
        assert_eq!(a, derive_seed(["ab", "c"]));
    }

    #[test]
    fn same_seed_same_stream() {
        let mut r1 = rng_from_seed(42);
        let mut r2 = rng_from_seed(42);
        for _ in 0..16 {
            assert_eq!(r1.next_u64(), r2.next_u64());
        }
    }
}
