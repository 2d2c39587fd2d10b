//! Deterministic random streams.
//!
//! Every random decision in the crate draws from a [`ChaCha8Rng`] derived
//! from `(seed, batch counter, lane)`. Lanes give each image of a batch its
//! own stream, so serial and parallel execution produce the same bits.

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type AugRng = ChaCha8Rng;

/// Lane reserved for batch-level draws (gates and permutations of paired variants).
pub const BATCH_LANE: u64 = u64::MAX;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for `lane` of batch `batch` under `seed`.
pub fn stream(seed: u64, batch: u64, lane: u64) -> AugRng {
    let mut state = seed ^ batch.rotate_left(32).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(lane);
    rng
}

/// Seeds for a batch: one stream for batch-level decisions, one per image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchStreams {
    pub seed: u64,
    pub batch: u64,
}

impl BatchStreams {
    pub fn new(seed: u64, batch: u64) -> Self {
        Self { seed, batch }
    }

    pub fn batch_rng(&self) -> AugRng {
        stream(self.seed, self.batch, BATCH_LANE)
    }

    pub fn image_rng(&self, index: usize) -> AugRng {
        stream(self.seed, self.batch, index as u64)
    }
}

/// Bernoulli gate: true with probability `p` (never for 0, always for 1).
pub fn coin<R: RngCore + ?Sized>(rng: &mut R, p: f64) -> bool {
    rng.random::<f64>() < p
}

/// Uniform random permutation of `0..n`.
pub fn permutation<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 0, 0), |r, _| Some(r.next_u64())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(stream(7, 0, 0), |r, _| Some(r.next_u64())).collect();
        assert_eq!(a, b);
        assert_ne!(stream(7, 0, 0).next_u64(), stream(7, 0, 1).next_u64());
        assert_ne!(stream(7, 0, 0).next_u64(), stream(7, 1, 0).next_u64());
        assert_ne!(stream(7, 0, 0).next_u64(), stream(8, 0, 0).next_u64());
    }

    #[test]
    fn coin_extremes() {
        let mut rng = stream(1, 2, 3);
        assert!((0..1000).all(|_| !coin(&mut rng, 0.0)));
        assert!((0..1000).all(|_| coin(&mut rng, 1.0)));
    }

    #[test]
    fn permutation_is_a_permutation() {
        let mut rng = stream(3, 0, 0);
        let mut p = permutation(&mut rng, 17);
        p.sort_unstable();
        assert_eq!(p, (0..17).collect::<Vec<_>>());
    }
}
