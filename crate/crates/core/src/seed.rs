//! Seed derivation and seeded index permutations.

use alloc::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Mixes a base seed with a stream id (splitmix64 finalizer), giving
/// independent seeds for per-member, per-repeat and per-stage generators.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Lazily yields a uniformly random permutation of `0..len`.
///
/// This is a Fisher-Yates shuffle over a virtual array where only swapped
/// slots are stored, so drawing `n` items costs `O(n log n)` regardless of
/// `len`.
#[derive(Debug, Clone)]
pub struct RandomOrder {
    len: u64,
    next: u64,
    swapped: BTreeMap<u64, u64>,
    rng: ChaCha8Rng,
}

impl RandomOrder {
    pub fn new(len: u64, seed: u64) -> Self {
        Self { len, next: 0, swapped: BTreeMap::new(), rng: rng(seed) }
    }
}

impl Iterator for RandomOrder {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.next >= self.len {
            return None;
        }
        let i = self.next;
        let j = self.rng.random_range(i..self.len);
        let at_i = self.swapped.remove(&i).unwrap_or(i);
        let out = if j == i {
            at_i
        } else {
            let at_j = self.swapped.get(&j).copied().unwrap_or(j);
            self.swapped.insert(j, at_i);
            at_j
        };
        self.next += 1;
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = usize::try_from(self.len - self.next).unwrap_or(usize::MAX);
        (rest, Some(rest))
    }
}
