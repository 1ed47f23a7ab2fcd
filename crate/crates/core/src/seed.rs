//! Deterministic seed derivation for per-item and per-stage RNG streams.

/// Derives an independent child seed from a master seed and a stream index.
///
/// SplitMix64-style finalizer; distinct `(master, stream)` pairs map to
/// well-separated seeds so items can be generated in any order or in chunks
/// without changing the result.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9e3779b97f4a7c15)
        .wrapping_add(stream.wrapping_mul(0xbf58476d1ce4e5b9));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
