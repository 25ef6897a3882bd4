//! Seeded random streams.
//!
//! All randomness in the crate flows through labeled substreams of a single
//! master seed, so independent stages (benchmark generation, teacher
//! calibration, batch sampling, negative sampling) never share state and the
//! whole pipeline stays reproducible. Labels are hashed with FNV-1a, which is
//! stable across platforms and releases, unlike `std`'s default hasher.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math;

/// The stream type used everywhere.
pub type Stream = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// SplitMix64 finalizer; decorrelates seed/label combinations.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the substream seed for `(seed, label)` without constructing a stream.
pub fn substream_seed(seed: u64, label: &str) -> u64 {
    mix(seed ^ fnv1a(label.as_bytes()))
}

/// A labeled substream of the master seed.
pub fn stream(seed: u64, label: &str) -> Stream {
    Stream::seed_from_u64(substream_seed(seed, label))
}

/// A substream keyed by `(seed, label, index)`, for per-item streams.
pub fn indexed_stream(seed: u64, label: &str, index: u64) -> Stream {
    Stream::seed_from_u64(mix(substream_seed(seed, label) ^ mix(index)))
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn uniform(rng: &mut Stream) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `[0, n)`. The modulo bias is below `n / 2^64` and
/// irrelevant at the scales used here; what matters is determinism.
pub fn index(rng: &mut Stream, n: usize) -> usize {
    debug_assert!(n > 0);
    (rng.next_u64() % n as u64) as usize
}

/// Standard normal draw via Box-Muller.
pub fn gaussian(rng: &mut Stream) -> f64 {
    let u1 = loop {
        let u = uniform(rng);
        if u > 0.0 {
            break u;
        }
    };
    let u2 = uniform(rng);
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
}

/// Sample `k` distinct indices from `[0, n)` by partial Fisher-Yates,
/// consuming `rng` deterministically. If `k >= n`, returns all of `[0, n)`
/// (shuffled).
pub fn sample_without_replacement(rng: &mut Stream, n: usize, k: usize) -> alloc::vec::Vec<usize> {
    let mut pool: alloc::vec::Vec<usize> = (0..n).collect();
    let take = k.min(n);
    for i in 0..take {
        let j = i + index(rng, n - i);
        pool.swap(i, j);
    }
    pool.truncate(take);
    pool
}
