//! Deterministic derivation of per-task seeds.
//!
//! Every random quantity in the crate is drawn from a generator seeded by
//! [`derive_seed`]`(master, label, index)`. The mix is fixed and documented
//! so that a published `(master, label, index)` triple reproduces the same
//! stream regardless of how many worker threads ran the campaign:
//!
//! ```text
//! mix64(z)   = SplitMix64 finalizer: z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
//!                                    z ^= z >> 27; z *= 0x94d049bb133111eb;
//!                                    z ^= z >> 31
//! label_hash = FNV-1a 64 over the UTF-8 bytes of the label
//! s = mix64(master + GOLDEN)
//! s = mix64(s ^ label_hash)
//! s = mix64(s ^ (index * GOLDEN))          (wrapping arithmetic, GOLDEN = 0x9e3779b97f4a7c15)
//! ```

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every sample stream.
pub type SampleRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(FNV_OFFSET, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// Seed for task `index` of the stream named `label` under `master`.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let s = mix64(master.wrapping_add(GOLDEN));
    let s = mix64(s ^ fnv1a(label));
    mix64(s ^ index.wrapping_mul(GOLDEN))
}

/// Generator for a fully derived seed.
pub fn rng_from_seed(seed: u64) -> SampleRng {
    SampleRng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn mix64_reference_values() {
        // SplitMix64 stream from state 0: first output is mix64(GOLDEN).
        assert_eq!(mix64(GOLDEN), 0xe220_a839_7b1d_cdaf);
        assert_eq!(mix64(0), 0);
    }

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(""), FNV_OFFSET);
        assert_eq!(fnv1a("a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn labels_and_indices_separate_streams() {
        let mut seen = HashSet::new();
        for label in ["gap", "condensate", "path"] {
            for i in 0..1000 {
                assert!(seen.insert(derive_seed(42, label, i)));
            }
        }
        assert_ne!(derive_seed(42, "gap", 0), derive_seed(43, "gap", 0));
    }
}
