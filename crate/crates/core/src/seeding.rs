//! Deterministic seed derivation.
//!
//! Restarts, trials, and algorithm runs each draw from an independent stream
//! whose seed is a pure function of the base seed and a tag path. Results are
//! therefore identical regardless of scheduling or worker count.

/// Derives a child seed from `base` and a path of tags (for example
/// `[n, r, trial]`).
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    let mut x = splitmix64(base ^ 0x9E37_79B9_7F4A_7C15);
    for &t in tags {
        x = splitmix64(x ^ t);
    }
    x
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
