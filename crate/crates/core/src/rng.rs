//! Seeded random streams.
//!
//! A [`StreamKey`] names a position in a tree of independent streams: the
//! root is a user seed, and [`StreamKey::child`] derives sub-streams by tag.
//! Opening a key yields an [`RngStream`] backed by ChaCha8, with the seed as
//! the ChaCha key and the derived stream id as its 64-bit nonce. Equal keys
//! always produce bit-identical sequences, independent of the order in which
//! other streams were used.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Address of a reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey {
    seed: u64,
    stream: u64,
}

impl StreamKey {
    pub const fn new(seed: u64, stream: u64) -> Self {
        StreamKey { seed, stream }
    }

    /// Root key for a user seed.
    pub const fn root(seed: u64) -> Self {
        StreamKey { seed, stream: 0 }
    }

    /// Derive an independent sub-stream. Distinct tags give distinct keys.
    pub fn child(self, tag: u64) -> Self {
        let mixed = splitmix64(self.stream ^ splitmix64(tag.wrapping_mul(GOLDEN)));
        StreamKey { seed: self.seed, stream: mixed }
    }

    pub fn seed(self) -> u64 {
        self.seed
    }

    pub fn stream(self) -> u64 {
        self.stream
    }

    pub fn open(self) -> RngStream {
        RngStream::new(self)
    }
}

/// An exclusive handle on one random stream.
#[derive(Clone, Debug)]
pub struct RngStream {
    key: StreamKey,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(key: StreamKey) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(key.seed);
        inner.set_stream(key.stream);
        RngStream { key, inner }
    }

    pub fn from_seed(seed: u64, stream: u64) -> Self {
        Self::new(StreamKey::new(seed, stream))
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    /// Uniform draw in the open interval (0, 1).
    pub fn open01(&mut self) -> f64 {
        loop {
            // 53 random mantissa bits, offset by half a step so 0 is impossible.
            let u = ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
            if u < 1.0 {
                return u;
            }
        }
    }

    /// Uniform index in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Lemire's multiply-shift with rejection.
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let x = self.inner.next_u64();
            let m = (x as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as usize;
            }
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn equal_keys_replay() {
        let key = StreamKey::root(42).child(3).child(9);
        let a: Vec<u64> = (0..16).map({
            let mut s = key.open();
            move |_| s.next_u64()
        }).collect();
        let mut s = key.open();
        let b: Vec<u64> = (0..16).map(|_| s.next_u64()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn children_differ() {
        let root = StreamKey::root(1);
        assert_ne!(root.child(0), root.child(1));
        assert_ne!(root.child(0).child(1), root.child(1).child(0));
        let mut a = root.child(0).open();
        let mut b = root.child(1).open();
        assert_ne!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn open01_in_range() {
        let mut s = RngStream::from_seed(7, 0);
        for _ in 0..10_000 {
            let u = s.open01();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn below_is_uniform_enough() {
        let mut s = RngStream::from_seed(11, 0);
        let mut counts = [0u32; 5];
        for _ in 0..50_000 {
            counts[s.below(5)] += 1;
        }
        for c in counts {
            assert!((c as i64 - 10_000).abs() < 500, "{counts:?}");
        }
    }
}
