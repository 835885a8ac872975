use serde::{Deserialize, Serialize};

/// Packed inclusion indicator for one model: bit j says whether candidate
/// feature j enters the design. Unused high bits of the last word are kept
/// zero so equality and hashing are canonical.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelKey {
    len: usize,
    words: Vec<u64>,
}

impl ModelKey {
    pub fn zeros(len: usize) -> Self {
        ModelKey {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut key = ModelKey::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            if b {
                key.set(j, true);
            }
        }
        key
    }

    /// Independent Bernoulli(prob) bits.
    pub fn random(rng: &mut impl rand::Rng, len: usize, prob: f64) -> Self {
        let mut key = ModelKey::zeros(len);
        for j in 0..len {
            if rng.random::<f64>() < prob {
                key.set(j, true);
            }
        }
        key
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, j: usize) -> bool {
        debug_assert!(j < self.len);
        self.words[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, j: usize, value: bool) {
        debug_assert!(j < self.len);
        let mask = 1u64 << (j % 64);
        if value {
            self.words[j / 64] |= mask;
        } else {
            self.words[j / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, j: usize) {
        debug_assert!(j < self.len);
        self.words[j / 64] ^= 1 << (j % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices of included features, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&j| self.get(j))
    }

    pub fn hamming(&self, other: &ModelKey) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Grow to `len` bits, new bits cleared. Used when a population expands.
    pub fn resized(&self, len: usize) -> ModelKey {
        assert!(len >= self.len);
        let mut key = ModelKey::zeros(len);
        key.words[..self.words.len()].copy_from_slice(&self.words);
        key
    }

    pub fn to_bitstring(&self) -> String {
        (0..self.len)
            .map(|j| if self.get(j) { '1' } else { '0' })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::master_rng;

    #[test]
    fn set_get_flip_roundtrip() {
        let mut k = ModelKey::zeros(130);
        assert_eq!(k.count_ones(), 0);
        k.set(0, true);
        k.set(64, true);
        k.set(129, true);
        assert!(k.get(0) && k.get(64) && k.get(129));
        assert!(!k.get(1) && !k.get(63) && !k.get(128));
        assert_eq!(k.count_ones(), 3);
        assert_eq!(k.ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        k.flip(64);
        assert_eq!(k.count_ones(), 2);
        k.flip(64);
        assert_eq!(k.count_ones(), 3);
    }

    #[test]
    fn hamming_counts_differing_bits() {
        let a = ModelKey::from_bools(&[true, false, true, false]);
        let b = ModelKey::from_bools(&[true, true, false, false]);
        assert_eq!(a.hamming(&b), 2);
        assert_eq!(a.hamming(&a), 0);
    }

    #[test]
    fn canonical_equality_after_clearing() {
        let mut a = ModelKey::zeros(70);
        a.set(69, true);
        a.set(69, false);
        assert_eq!(a, ModelKey::zeros(70));
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let mut ha = DefaultHasher::new();
        let mut hb = DefaultHasher::new();
        a.hash(&mut ha);
        ModelKey::zeros(70).hash(&mut hb);
        assert_eq!(ha.finish(), hb.finish());
    }

    #[test]
    fn random_respects_probability_extremes() {
        let mut rng = master_rng(1);
        assert_eq!(ModelKey::random(&mut rng, 100, 0.0).count_ones(), 0);
        assert_eq!(ModelKey::random(&mut rng, 100, 1.0).count_ones(), 100);
        let half = ModelKey::random(&mut rng, 10_000, 0.5).count_ones();
        assert!((4_500..=5_500).contains(&half), "got {half}");
    }

    #[test]
    fn resized_preserves_low_bits() {
        let a = ModelKey::from_bools(&[true, false, true]);
        let b = a.resized(100);
        assert_eq!(b.len(), 100);
        assert_eq!(b.ones().collect::<Vec<_>>(), vec![0, 2]);
    }
}
