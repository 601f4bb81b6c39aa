//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream
//! identified by a `(seed, stream_id)` pair. The seed is expanded into the
//! 256-bit ChaCha key with SplitMix64 and `stream_id` selects one of the
//! 2^64 ChaCha streams under that key. Work is split into fixed units (one
//! generated sample, one block of permutation rounds, ...) and each unit
//! derives its own substream from its index, so results never depend on how
//! rayon schedules the units.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RngSeed {
    pub seed: u64,
    pub stream_id: u64,
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RngSeed {
    pub const fn new(seed: u64) -> Self {
        RngSeed { seed, stream_id: 0 }
    }

    pub const fn with_stream(seed: u64, stream_id: u64) -> Self {
        RngSeed { seed, stream_id }
    }

    /// Deterministically derive the seed of child unit `index`.
    ///
    /// The child keeps the master seed and hashes `(stream_id, index)` into a
    /// fresh stream id, so children of different parents do not overlap in
    /// practice.
    pub fn substream(&self, index: u64) -> RngSeed {
        let mut state = self.stream_id ^ 0x6a09_e667_f3bc_c909;
        let a = splitmix64(&mut state);
        let mut state = a ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03);
        let b = splitmix64(&mut state);
        RngSeed {
            seed: self.seed,
            stream_id: b,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = self.seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }
}

impl std::fmt::Display for RngSeed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.seed, self.stream_id)
    }
}

impl std::str::FromStr for RngSeed {
    type Err = String;

    /// Accepts `seed` or `seed:stream_id`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad seed component {t:?}: {e}"))
        };
        match s.split_once(':') {
            Some((a, b)) => Ok(RngSeed::with_stream(parse(a)?, parse(b)?)),
            None => Ok(RngSeed::new(parse(s)?)),
        }
    }
}

/// Uniform integer in `0..bound` (Lemire's multiply-shift with rejection).
///
/// Written out rather than delegated to `rand` so the mapping from the raw
/// stream to indices is fixed by this crate and not by a dependency version.
#[inline]
pub fn bounded_u32<R: RngCore + ?Sized>(rng: &mut R, bound: u32) -> u32 {
    debug_assert!(bound > 0);
    let mut m = u64::from(rng.next_u32()) * u64::from(bound);
    let mut low = m as u32;
    if low < bound {
        let threshold = bound.wrapping_neg() % bound;
        while low < threshold {
            m = u64::from(rng.next_u32()) * u64::from(bound);
            low = m as u32;
        }
    }
    (m >> 32) as u32
}

/// In-place Fisher-Yates shuffle driven by [`bounded_u32`].
#[inline]
pub fn shuffle<T, R: RngCore + ?Sized>(values: &mut [T], rng: &mut R) {
    for i in (1..values.len()).rev() {
        let j = bounded_u32(rng, (i + 1) as u32) as usize;
        values.swap(i, j);
    }
}

/// Partial Fisher-Yates: after the call `values[..k]` is a uniformly random
/// ordered `k`-subset of the original contents.
#[inline]
pub fn partial_shuffle<T, R: RngCore + ?Sized>(values: &mut [T], k: usize, rng: &mut R) {
    let n = values.len();
    for i in 0..k.min(n.saturating_sub(1)) {
        let j = i + bounded_u32(rng, (n - i) as u32) as usize;
        values.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let s = RngSeed::with_stream(42, 7);
        let (mut r1, mut r2) = (s.rng(), s.rng());
        let a: Vec<u32> = (0..16).map(|_| r1.next_u32()).collect();
        let b: Vec<u32> = (0..16).map(|_| r2.next_u32()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ() {
        let mut a = RngSeed::with_stream(1, 0).rng();
        let mut b = RngSeed::with_stream(1, 1).rng();
        let mut c = RngSeed::with_stream(2, 0).rng();
        let x = a.next_u64();
        assert_ne!(x, b.next_u64());
        assert_ne!(x, c.next_u64());
    }

    #[test]
    fn substreams_are_distinct() {
        let base = RngSeed::new(9);
        let ids: std::collections::HashSet<u64> =
            (0..10_000).map(|i| base.substream(i).stream_id).collect();
        assert_eq!(ids.len(), 10_000);
        assert_eq!(base.substream(3), base.substream(3));
    }

    #[test]
    fn parse_and_display() {
        let s: RngSeed = "12:34".parse().unwrap();
        assert_eq!(s, RngSeed::with_stream(12, 34));
        assert_eq!(s.to_string(), "12:34");
        assert_eq!("5".parse::<RngSeed>().unwrap(), RngSeed::new(5));
        assert!("x".parse::<RngSeed>().is_err());
    }

    #[test]
    fn bounded_is_uniform_enough() {
        let mut rng = RngSeed::new(3).rng();
        let mut counts = [0u32; 7];
        for _ in 0..70_000 {
            counts[bounded_u32(&mut rng, 7) as usize] += 1;
        }
        for c in counts {
            assert!((c as i64 - 10_000).abs() < 500, "{counts:?}");
        }
    }

    #[test]
    fn shuffle_covers_all_permutations_of_three() {
        let mut rng = RngSeed::new(11).rng();
        let mut seen = std::collections::HashMap::new();
        for _ in 0..60_000 {
            let mut v = [0u8, 1, 2];
            shuffle(&mut v, &mut rng);
            *seen.entry(v).or_insert(0u32) += 1;
        }
        assert_eq!(seen.len(), 6);
        for &c in seen.values() {
            assert!((c as i64 - 10_000).abs() < 500);
        }
    }

    #[test]
    fn partial_shuffle_keeps_multiset() {
        let mut rng = RngSeed::new(5).rng();
        let mut v: Vec<u32> = (0..20).collect();
        partial_shuffle(&mut v, 8, &mut rng);
        let mut sorted = v.clone();
        sorted.sort();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
    }
}
