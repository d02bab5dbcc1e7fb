//! Stable seed derivation. Every random stream in an experiment is keyed by a
//! hash of its coordinates, so trials are reproducible independently of
//! scheduling and of which other sweep points exist.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one seed.
pub fn derive(base: u64, words: &[u64]) -> u64 {
    words.iter().fold(mix(base), |acc, &w| mix(acc ^ mix(w)))
}

/// Derives a child seed from a parent and a string tag plus numeric words.
pub fn child(parent: u64, tag: &str, words: &[u64]) -> u64 {
    let tag_word = tag.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3));
    let mut all = Vec::with_capacity(words.len() + 1);
    all.push(tag_word);
    all.extend_from_slice(words);
    derive(parent, &all)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
