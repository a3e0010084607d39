//! Channels, channel sets, prime search and the randomness contract.

use std::fmt;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, ZosError};

/// A licensed channel, 1-based (`c_1 .. c_M`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelId(pub u32);

impl ChannelId {
    pub fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for ChannelId {
    fn from(v: u32) -> Self {
        ChannelId(v)
    }
}

/// A nonempty subset of the whole channel set `{c_1, .., c_M}`, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChannelSet {
    universe: u32,
    members: Vec<ChannelId>,
}

impl ChannelSet {
    /// Builds a set from raw indices. Order of `indices` does not matter but
    /// duplicates are rejected.
    pub fn new(universe: u32, indices: impl IntoIterator<Item = u32>) -> Result<Self> {
        if universe < 2 {
            return Err(ZosError::UniverseTooSmall(universe));
        }
        let mut members: Vec<ChannelId> = indices.into_iter().map(ChannelId).collect();
        if members.is_empty() {
            return Err(ZosError::EmptyChannelSet);
        }
        members.sort_unstable();
        for w in members.windows(2) {
            if w[0] == w[1] {
                return Err(ZosError::DuplicateChannel(w[0].0));
            }
        }
        for &c in &members {
            if c.0 < 1 || c.0 > universe {
                return Err(ZosError::ChannelOutOfRange {
                    index: c.0,
                    universe,
                });
            }
        }
        Ok(ChannelSet { universe, members })
    }

    /// The whole channel set `C`.
    pub fn whole(universe: u32) -> Result<Self> {
        Self::new(universe, 1..=universe)
    }

    /// Set whose members are the set bits of `mask` (bit 0 is channel 1).
    pub fn from_mask(universe: u32, mask: u64) -> Result<Self> {
        Self::new(
            universe,
            (0..universe.min(64)).filter(|b| mask >> b & 1 == 1).map(|b| b + 1),
        )
    }

    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[ChannelId] {
        &self.members
    }

    pub fn contains(&self, c: ChannelId) -> bool {
        self.members.binary_search(&c).is_ok()
    }

    pub fn intersection(&self, other: &ChannelSet) -> Vec<ChannelId> {
        self.members
            .iter()
            .copied()
            .filter(|&c| other.contains(c))
            .collect()
    }

    pub fn intersects(&self, other: &ChannelSet) -> bool {
        self.members.iter().any(|&c| other.contains(c))
    }
}

impl fmt::Display for ChannelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str("}")
    }
}

const PRIME_TABLE_LIMIT: u32 = 1 << 12;

fn prime_table() -> &'static [u32] {
    static TABLE: OnceLock<Vec<u32>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut primes: Vec<u32> = Vec::new();
        for n in 2..PRIME_TABLE_LIMIT {
            if primes.iter().take_while(|&&p| p * p <= n).all(|&p| n % p != 0) {
                primes.push(n);
            }
        }
        primes
    })
}

/// Deterministic primality by trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in prime_table() {
        let p = p as u64;
        if p * p > n {
            return true;
        }
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    // beyond the table: continue with odd divisors
    let mut d = PRIME_TABLE_LIMIT as u64 | 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Smallest prime `P >= m`. `m = 1` maps to 2.
///
/// Panics if `m == 0`.
pub fn smallest_prime_at_least(m: u32) -> u32 {
    assert!(m >= 1, "smallest_prime_at_least requires m >= 1");
    let mut p = m.max(2);
    while !is_prime(p as u64) {
        p += 1;
    }
    debug_assert!(p as u64 <= 2 * m as u64, "Bertrand-Chebyshev violated at m={m}");
    p
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a seed and a label path into a new 64-bit seed.
///
/// `h0 = mix64(seed)`, then `h_{k+1} = mix64(h_k ^ mix64(label_k))`.
pub fn derive_seed(seed: u64, labels: &[u64]) -> u64 {
    labels
        .iter()
        .fold(mix64(seed), |h, &l| mix64(h ^ mix64(l)))
}

/// Seeded ChaCha8 stream.
///
/// Streams are single-owner. Work that runs concurrently gets its own stream
/// through [`RngStream::derive`], which hashes this stream's *seed* (not its
/// current state) together with a label path, so substreams do not depend on
/// how much of the parent has been consumed.
#[derive(Debug)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn derive(&self, labels: &[u64]) -> RngStream {
        RngStream::new(derive_seed(self.seed, labels))
    }

    /// Uniform index in `0..n`. `n` must be nonzero.
    pub fn index(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Uniformly random ordering of all members of `set`.
pub fn random_permutation(set: &ChannelSet, rng: &mut RngStream) -> Vec<ChannelId> {
    let mut items = set.members().to_vec();
    items.shuffle(rng);
    items
}

/// `k` independent uniform draws from `set`, with replacement.
pub fn random_selection(set: &ChannelSet, k: usize, rng: &mut RngStream) -> Vec<ChannelId> {
    let members = set.members();
    (0..k).map(|_| members[rng.index(members.len())]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division(n: u32) -> bool {
        n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn prime_examples() {
        assert_eq!(smallest_prime_at_least(2), 2);
        assert_eq!(smallest_prime_at_least(4), 5);
        assert_eq!(smallest_prime_at_least(1), 2);
        // oracle: first prime in [10, 20] by trial division
        let oracle = (10..=20).find(|&n| trial_division(n)).unwrap();
        assert_eq!(oracle, 11);
        assert_eq!(smallest_prime_at_least(10), oracle);
    }

    #[test]
    #[should_panic]
    fn prime_rejects_zero() {
        smallest_prime_at_least(0);
    }

    #[test]
    fn prime_against_trial_division() {
        for m in 1..=10_000u32 {
            let p = smallest_prime_at_least(m);
            assert!(trial_division(p), "{p} not prime");
            assert!(p >= m && p <= 2 * m);
            assert!((m..p).all(|n| !trial_division(n)));
            assert_eq!(smallest_prime_at_least(p), p);
        }
    }

    #[test]
    fn is_prime_beyond_table() {
        assert!(is_prime(4099));
        assert!(!is_prime(4097)); // 17 * 241
        assert!(is_prime(1_000_003));
        assert!(!is_prime(4_100_625)); // 2025^2
    }

    #[test]
    fn channel_set_validation() {
        assert_eq!(ChannelSet::new(5, []), Err(ZosError::EmptyChannelSet));
        assert_eq!(ChannelSet::new(1, [1]), Err(ZosError::UniverseTooSmall(1)));
        assert_eq!(
            ChannelSet::new(4, [5]),
            Err(ZosError::ChannelOutOfRange {
                index: 5,
                universe: 4
            })
        );
        assert_eq!(
            ChannelSet::new(4, [0]),
            Err(ZosError::ChannelOutOfRange {
                index: 0,
                universe: 4
            })
        );
        assert_eq!(ChannelSet::new(4, [2, 2]), Err(ZosError::DuplicateChannel(2)));
        let s = ChannelSet::new(4, [4, 1, 3]).unwrap();
        assert_eq!(s.members(), &[ChannelId(1), ChannelId(3), ChannelId(4)]);
        assert_eq!(s.to_string(), "{1,3,4}");
        assert_eq!(ChannelSet::from_mask(4, 0b1101).unwrap(), s);
    }

    #[test]
    fn permutation_examples() {
        let set = ChannelSet::new(4, [1, 3, 4]).unwrap();
        let mut seen = std::collections::HashSet::new();
        for seed in 0..200 {
            let p = random_permutation(&set, &mut RngStream::new(seed));
            assert_eq!(p.len(), 3);
            seen.insert(p);
        }
        // the <3,1,4> ordering is reachable, as are all 3! orderings
        assert!(seen.contains(&vec![ChannelId(3), ChannelId(1), ChannelId(4)]));
        assert_eq!(seen.len(), 6);

        let single = ChannelSet::new(5, [5]).unwrap();
        assert_eq!(
            random_permutation(&single, &mut RngStream::new(1)),
            vec![ChannelId(5)]
        );
    }

    #[test]
    fn permutation_is_uniform_on_pairs() {
        let set = ChannelSet::new(2, [1, 2]).unwrap();
        let mut rng = RngStream::new(42);
        let draws = 10_000;
        let forward = (0..draws)
            .filter(|_| random_permutation(&set, &mut rng)[0] == ChannelId(1))
            .count();
        let freq = forward as f64 / draws as f64;
        assert!((freq - 0.5).abs() <= 0.02, "freq {freq}");
        // chi-square with one degree of freedom, 99.9% critical value 10.83
        let e = draws as f64 / 2.0;
        let chi = (forward as f64 - e).powi(2) / e + ((draws - forward) as f64 - e).powi(2) / e;
        assert!(chi < 10.83, "chi {chi}");
    }

    #[test]
    fn selection_examples() {
        let set = ChannelSet::new(4, [1, 3, 4]).unwrap();
        assert!(random_selection(&set, 0, &mut RngStream::new(0)).is_empty());
        let mut reached = false;
        for seed in 0..500 {
            let s = random_selection(&set, 3, &mut RngStream::new(seed));
            assert_eq!(s.len(), 3);
            assert!(s.iter().all(|&c| set.contains(c)));
            reached |= s == vec![ChannelId(1), ChannelId(3), ChannelId(1)];
        }
        assert!(reached, "<1,3,1> should be a reachable draw");
        let single = ChannelSet::new(3, [2]).unwrap();
        assert_eq!(
            random_selection(&single, 4, &mut RngStream::new(9)),
            vec![ChannelId(2); 4]
        );
    }

    #[test]
    fn derived_streams_are_reproducible_and_distinct() {
        let root = RngStream::new(7);
        let mut a = root.derive(&[1, 2]);
        let mut b = root.derive(&[1, 2]);
        let mut c = root.derive(&[2, 1]);
        let xa: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let xb: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let xc: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xa, xb);
        assert_ne!(xa, xc);
        assert_ne!(derive_seed(7, &[]), derive_seed(7, &[0]));
    }
}
