//! Deterministic seed derivation.
//!
//! Every random decision in the crate flows from one `u64` seed through the
//! helpers here, so that results are bit-reproducible and independent of
//! execution order or thread count. Stages derive a seed from the global one
//! by name, and per-unit work (a walk, a candidate, a trial cell) derives its
//! own seed from the stage seed and its indices.

/// SplitMix64 finalizer. Good avalanche behavior, stable across platforms.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `base` and a sequence of index parts.
///
/// `derive(s, &[a, b])` differs from `derive(s, &[b, a])` and from
/// `derive(s, &[a])`; parts are folded in order through SplitMix64.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut s = splitmix64(base);
    for (i, &p) in parts.iter().enumerate() {
        s = splitmix64(s ^ p.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(i as u64 + 1)));
    }
    s
}

/// Derives a stage seed from the global seed and the stage's name.
pub fn derive_seed_str(base: u64, stage: &str) -> u64 {
    let mut s = splitmix64(base);
    for chunk in stage.as_bytes().chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        s = splitmix64(s ^ u64::from_le_bytes(word));
    }
    // Fold in the length so "ab" + "c" cannot collide with "a" + "bc".
    splitmix64(s ^ stage.len() as u64)
}
