//! Deterministic random stream.
//!
//! Every random choice in the workbench is drawn from a [`DetRng`]: the
//! xoshiro256** generator seeded from a 64-bit integer through SplitMix64
//! (the reference seeding procedure of the xoshiro authors). Big integers are
//! sampled by rejection so the stream is reproducible from the algorithm
//! description alone; see `docs/formats.md`.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

#[derive(Debug, Clone)]
pub struct DetRng(Xoshiro256StarStar);

impl DetRng {
    pub fn from_seed(seed: u64) -> Self {
        DetRng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn next_bit(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// Uniform in `[0, bound)`. Panics if `bound` is zero.
    pub fn below_u64(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        self.below(&BigUint::from(bound))
            .iter_u64_digits()
            .next()
            .unwrap_or(0)
    }

    /// Uniform in `[0, bound)`.
    ///
    /// Draws `ceil(bits / 64)` words, least significant first, clears the
    /// bits above `bound.bits()`, and retries until the candidate is below
    /// `bound`. Panics if `bound` is zero.
    pub fn below(&mut self, bound: &BigUint) -> BigUint {
        assert!(!bound.is_zero(), "empty range");
        let bits = bound.bits();
        let words = bits.div_ceil(64) as usize;
        let top_bits = bits - 64 * (words as u64 - 1);
        let top_mask = if top_bits == 64 {
            u64::MAX
        } else {
            (1u64 << top_bits) - 1
        };
        loop {
            let mut digits = Vec::with_capacity(words);
            for i in 0..words {
                let mut word = self.next_u64();
                if i == words - 1 {
                    word &= top_mask;
                }
                digits.push(word);
            }
            let candidate = from_u64_digits(&digits);
            if &candidate < bound {
                return candidate;
            }
        }
    }

    /// Uniform in `[low, high]`.
    pub fn range_inclusive(&mut self, low: &BigUint, high: &BigUint) -> BigUint {
        assert!(low <= high, "empty range");
        let width = high - low + BigUint::one();
        low + self.below(&width)
    }

    pub fn bytes(&mut self, len: usize) -> Vec<u8> {
        (0..len).map(|_| (self.next_u64() >> 56) as u8).collect()
    }
}

fn from_u64_digits(digits: &[u64]) -> BigUint {
    let mut bytes = Vec::with_capacity(digits.len() * 8);
    for d in digits {
        bytes.extend_from_slice(&d.to_le_bytes());
    }
    BigUint::from_bytes_le(&bytes)
}
