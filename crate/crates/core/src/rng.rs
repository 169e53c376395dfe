//! Seed derivation and the counter-based sampling coin.
//!
//! Every random decision in the sparsifier is a pure function of a root
//! seed and a few integer coordinates, so results never depend on the order
//! in which edges are visited or on how work is split across threads.

use crate::hypergraph::EdgeId;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a sub-seed from `seed` and an integer coordinate.
#[inline]
pub fn derive(seed: u64, coord: u64) -> u64 {
    mix64(mix64(seed) ^ coord.rotate_left(17) ^ 0xD6E8_FEB8_6659_FD93)
}

/// Derives a sub-seed from `seed` and a textual label (FNV-1a, then mixed).
pub fn derive_labeled(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01B3);
    }
    derive(seed, h)
}

/// Coin source for one level of one coreset-and-sample pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SamplingStream {
    pub seed: u64,
    pub epoch: u64,
}

impl SamplingStream {
    pub fn new(seed: u64, epoch: u64) -> Self {
        Self { seed, epoch }
    }

    /// Fair coin for `id`; `true` keeps the edge in the sample.
    #[inline]
    pub fn keep(&self, id: EdgeId) -> bool {
        mix64(derive(self.seed, self.epoch) ^ mix64(id.0)) & 1 == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coin_is_pure() {
        let s = SamplingStream::new(7, 3);
        for i in 0..100 {
            assert_eq!(s.keep(EdgeId(i)), s.keep(EdgeId(i)));
        }
    }

    #[test]
    fn coin_is_roughly_fair() {
        let s = SamplingStream::new(42, 1);
        let heads = (0..100_000u64).filter(|&i| s.keep(EdgeId(i))).count();
        // 100k fair coins: sd ~ 158
        assert!((heads as i64 - 50_000).abs() < 800, "heads = {heads}");
    }

    #[test]
    fn epochs_decorrelate() {
        let a = SamplingStream::new(1, 1);
        let b = SamplingStream::new(1, 2);
        let agree = (0..10_000u64)
            .filter(|&i| a.keep(EdgeId(i)) == b.keep(EdgeId(i)))
            .count();
        assert!((agree as i64 - 5_000).abs() < 300);
    }

    #[test]
    fn labels_differ() {
        assert_ne!(derive_labeled(5, "gen"), derive_labeled(5, "run"));
        assert_eq!(derive_labeled(5, "gen"), derive_labeled(5, "gen"));
    }
}
