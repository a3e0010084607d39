//! 0-type and 1-type elementary sequences.
//!
//! Positions in the comments below are 1-based; storage is a plain 0-based
//! `Vec`, and [`ElementarySequence::item`] is the only 1-based accessor.

use crate::model::{
    random_permutation, random_selection, smallest_prime_at_least, ChannelId, ChannelSet,
    RngStream,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementaryKind {
    /// Length `2P`: X and Y (both length P) interleaved once.
    ZeroType,
    /// Length `2P(P+1)`: X (length P) on odd positions repeated P+1 times,
    /// Y (length P+1) on even positions repeated P times.
    OneType,
    /// The single stay channel.
    SType,
}

impl ElementaryKind {
    pub fn bit(self) -> Option<u8> {
        match self {
            ElementaryKind::ZeroType => Some(0),
            ElementaryKind::OneType => Some(1),
            ElementaryKind::SType => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementarySequence {
    kind: ElementaryKind,
    items: Vec<ChannelId>,
    prime: Option<u32>,
}

impl ElementarySequence {
    /// Interleaves explicit `x` and `y` sequences.
    ///
    /// `x` must have length `prime`; `y` must have length `prime` for
    /// [`ElementaryKind::ZeroType`] and `prime + 1` for
    /// [`ElementaryKind::OneType`].
    pub fn interleave(kind: ElementaryKind, prime: u32, x: &[ChannelId], y: &[ChannelId]) -> Self {
        let p = prime as usize;
        assert_eq!(x.len(), p, "X must have P items");
        let items = match kind {
            ElementaryKind::ZeroType => {
                assert_eq!(y.len(), p, "Y must have P items for a 0-type sequence");
                x.iter().zip(y).flat_map(|(&a, &b)| [a, b]).collect()
            }
            ElementaryKind::OneType => {
                assert_eq!(y.len(), p + 1, "Y must have P+1 items for a 1-type sequence");
                // Z[2k-1] = X[((k-1) mod P) + 1], Z[2k] = Y[((k-1) mod (P+1)) + 1]
                (0..p * (p + 1))
                    .flat_map(|k| [x[k % p], y[k % (p + 1)]])
                    .collect()
            }
            ElementaryKind::SType => panic!("s-type sequences are built with ElementarySequence::stay"),
        };
        ElementarySequence {
            kind,
            items,
            prime: Some(prime),
        }
    }

    pub fn stay(channel: ChannelId) -> Self {
        ElementarySequence {
            kind: ElementaryKind::SType,
            items: vec![channel],
            prime: None,
        }
    }

    pub fn kind(&self) -> ElementaryKind {
        self.kind
    }

    pub fn items(&self) -> &[ChannelId] {
        &self.items
    }

    pub fn prime(&self) -> Option<u32> {
        self.prime
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// 1-based item access, `1 <= n <= len`.
    pub fn item(&self, n: usize) -> ChannelId {
        self.items[n - 1]
    }

    /// Item at 1-based slot `t` of the infinite repetition `<Z, Z, Z, ...>`.
    #[inline]
    pub fn cyclic(&self, t: u64) -> ChannelId {
        self.items[((t - 1) % self.items.len() as u64) as usize]
    }
}

/// One block of `len` items whose first `m` entries are a fresh permutation of
/// `available` and whose remaining `len - m` entries are uniform draws.
fn permutation_block(available: &ChannelSet, len: usize, rng: &mut RngStream) -> Vec<ChannelId> {
    let mut block = random_permutation(available, rng);
    if len > block.len() {
        let extra = len - block.len();
        block.extend(random_selection(available, extra, rng));
    }
    block
}

/// Builds a 0-type (`b = 0`) or 1-type (`b = 1`) elementary sequence over
/// `available`. Every call draws fresh permutations for X and Y.
pub fn zero_one_es(available: &ChannelSet, b: u8, rng: &mut RngStream) -> ElementarySequence {
    assert!(b <= 1, "b must be 0 or 1");
    assert!(!available.is_empty(), "available set must be nonempty");
    let prime = smallest_prime_at_least(available.len() as u32);
    let p = prime as usize;
    let x = permutation_block(available, p, rng);
    let y = permutation_block(available, p + b as usize, rng);
    let kind = if b == 0 {
        ElementaryKind::ZeroType
    } else {
        ElementaryKind::OneType
    };
    ElementarySequence::interleave(kind, prime, &x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u32]) -> Vec<ChannelId> {
        v.iter().map(|&i| ChannelId(i)).collect()
    }

    #[test]
    fn zero_type_fixture() {
        // hand-interleaved: X=<3,1,4>, Y=<4,3,1> -> <3,4,1,3,4,1>
        let z = ElementarySequence::interleave(
            ElementaryKind::ZeroType,
            3,
            &ids(&[3, 1, 4]),
            &ids(&[4, 3, 1]),
        );
        assert_eq!(z.items(), ids(&[3, 4, 1, 3, 4, 1]).as_slice());
        assert_eq!(z.item(1), ChannelId(3));
        assert_eq!(z.cyclic(7), ChannelId(3));
    }

    #[test]
    fn one_type_fixture() {
        // P=2, X=<1,2>, Y=<2,1,2>: k=1..6 gives X: 1 2 1 2 1 2, Y: 2 1 2 2 1 2
        let z = ElementarySequence::interleave(
            ElementaryKind::OneType,
            2,
            &ids(&[1, 2]),
            &ids(&[2, 1, 2]),
        );
        assert_eq!(z.items(), ids(&[1, 2, 2, 1, 1, 2, 2, 2, 1, 1, 2, 2]).as_slice());
    }

    #[test]
    fn length_for_pair_set() {
        let set = ChannelSet::new(4, [1, 2]).unwrap();
        let z = zero_one_es(&set, 1, &mut RngStream::new(3));
        assert_eq!(z.len(), 12);
        assert_eq!(z.kind(), ElementaryKind::OneType);
        assert_eq!(z.prime(), Some(2));
    }

    #[test]
    fn singleton_is_forced() {
        let set = ChannelSet::new(4, [2]).unwrap();
        let z = zero_one_es(&set, 0, &mut RngStream::new(0));
        assert_eq!(z.items(), ids(&[2, 2, 2, 2]).as_slice());
        let z = zero_one_es(&set, 1, &mut RngStream::new(0));
        assert_eq!(z.len(), 12);
        assert!(z.items().iter().all(|&c| c == ChannelId(2)));
    }

    #[test]
    fn x_and_y_are_independent() {
        let set = ChannelSet::new(5, [1, 2, 3, 4, 5]).unwrap();
        let differ = (0..100).any(|seed| {
            let z = zero_one_es(&set, 0, &mut RngStream::new(seed));
            let x: Vec<_> = z.items().iter().step_by(2).take(5).collect();
            let y: Vec<_> = z.items().iter().skip(1).step_by(2).take(5).collect();
            x != y
        });
        assert!(differ);
    }

    #[test]
    fn fresh_draw_per_call() {
        let set = ChannelSet::new(6, [1, 2, 3, 4, 5, 6]).unwrap();
        let mut rng = RngStream::new(11);
        let a = zero_one_es(&set, 1, &mut rng);
        let b = zero_one_es(&set, 1, &mut rng);
        assert_ne!(a, b);
    }

    #[test]
    #[should_panic]
    fn rejects_bad_bit() {
        let set = ChannelSet::new(4, [1]).unwrap();
        zero_one_es(&set, 2, &mut RngStream::new(0));
    }
}
