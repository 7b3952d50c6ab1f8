//! Deterministic randomness for nonces, key material and trial seeding.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::word::Word;

/// A seeded ChaCha8 stream. Child streams are keyed by a mix of the parent
/// seed and a label, so per-trial streams are independent of each other and
/// of the order in which they are created.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the `label`-th child of a stream seeded with `seed`.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    splitmix(splitmix(seed) ^ splitmix(label.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream; does not advance `self`.
    pub fn fork(&self, label: u64) -> SeededRng {
        SeededRng::new(derive_seed(self.seed, label))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform word of the given width.
    pub fn draw(&mut self, width: u32) -> Word {
        assert!((1..=128).contains(&width), "width {width} outside 1..=128");
        let lo = u128::from(self.inner.next_u64());
        let value = if width > 64 {
            lo | (u128::from(self.inner.next_u64()) << 64)
        } else {
            lo
        };
        Word::truncate(value, width)
    }

    /// Uniform nonzero word, for secrets that are used as moduli.
    pub fn draw_nonzero(&mut self, width: u32) -> Word {
        loop {
            let w = self.draw(width);
            if !w.is_zero() {
                return w;
            }
        }
    }

    /// Uniform nonzero XOR mask.
    pub fn draw_mask(&mut self, width: u32) -> Word {
        self.draw_nonzero(width)
    }

    pub fn coin(&mut self) -> bool {
        self.inner.random()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn first_draws_differ() {
        let mut rng = SeededRng::new(42);
        assert_ne!(rng.draw(16), rng.draw(16));
    }

    #[test]
    fn reproducible() {
        let a: Vec<_> = {
            let mut r = SeededRng::new(9);
            (0..10).map(|_| r.draw(96)).collect()
        };
        let mut r = SeededRng::new(9);
        let b: Vec<_> = (0..10).map(|_| r.draw(96)).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn byte_frequencies_within_three_sigma() {
        let mut rng = SeededRng::new(1);
        let n = 100_000u32;
        let mut counts = [0u32; 256];
        for _ in 0..n {
            counts[rng.draw(8).value() as usize] += 1;
        }
        let p = 1.0 / 256.0;
        let mean = f64::from(n) * p;
        let sigma = (f64::from(n) * p * (1.0 - p)).sqrt();
        for (v, &c) in counts.iter().enumerate() {
            assert!((f64::from(c) - mean).abs() <= 3.0 * sigma + 1.0, "value {v}: {c}");
        }
        // Pearson chi-square, 255 degrees of freedom; 99.9% quantile is ~330.
        let chi2: f64 = counts
            .iter()
            .map(|&c| (f64::from(c) - mean).powi(2) / mean)
            .sum();
        assert!(chi2 < 330.0, "chi2 = {chi2}");
    }

    #[test]
    fn child_streams_are_disjoint() {
        let parent = SeededRng::new(77);
        let mut a = parent.fork(0);
        let mut b = parent.fork(1);
        let sa: HashSet<u64> = (0..1000).map(|_| a.next_u64()).collect();
        let sb: HashSet<u64> = (0..1000).map(|_| b.next_u64()).collect();
        assert!(sa.is_disjoint(&sb));
        assert_eq!(parent.fork(3).seed(), parent.fork(3).seed());
    }

    #[test]
    fn nonzero_draws() {
        let mut rng = SeededRng::new(5);
        for _ in 0..1000 {
            assert!(!rng.draw_nonzero(1).is_zero());
        }
    }
}
