//! Seeds and complete ZOS hopping schedules.

use std::fmt;
use std::fmt::Write as _;

use crate::elementary::{zero_one_es, ElementaryKind, ElementarySequence};
use crate::error::{Result, ZosError};
use crate::model::{smallest_prime_at_least, ChannelId, ChannelSet, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeedSymbol {
    Zero,
    One,
    Stay,
}

impl SeedSymbol {
    fn as_char(self) -> char {
        match self {
            SeedSymbol::Zero => '0',
            SeedSymbol::One => '1',
            SeedSymbol::Stay => 's',
        }
    }

    fn kind(self) -> ElementaryKind {
        match self {
            SeedSymbol::Zero => ElementaryKind::ZeroType,
            SeedSymbol::One => ElementaryKind::OneType,
            SeedSymbol::Stay => ElementaryKind::SType,
        }
    }
}

/// `ceil(log2 M)` for `M >= 2`.
pub fn frame_bits(universe: u32) -> u32 {
    assert!(universe >= 2, "whole channel set needs at least 2 channels");
    u32::BITS - (universe - 1).leading_zeros()
}

/// Timeslots per round, `6L + 1`.
pub fn round_length(bits: u32) -> u64 {
    6 * bits as u64 + 1
}

/// Big-endian `bits`-bit encoding of `s - 1`.
pub fn encode_stay_channel(stay: ChannelId, bits: u32) -> Vec<SeedSymbol> {
    assert!(stay.0 >= 1, "channels are 1-based");
    let v = (stay.0 - 1) as u64;
    assert!(
        bits >= 64 || v < 1u64 << bits,
        "channel {stay} does not fit in {bits} bits"
    );
    (0..bits)
        .rev()
        .map(|k| {
            if v >> k & 1 == 1 {
                SeedSymbol::One
            } else {
                SeedSymbol::Zero
            }
        })
        .collect()
}

/// The `6L+1`-symbol seed `<A, O, I, A, O, I, s>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Seed {
    bits: u32,
    symbols: Vec<SeedSymbol>,
    stay: ChannelId,
}

impl Seed {
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn symbols(&self) -> &[SeedSymbol] {
        &self.symbols
    }

    pub fn stay_channel(&self) -> ChannelId {
        self.stay
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols.iter().enumerate() {
            if i > 0 {
                f.write_char(' ')?;
            }
            f.write_char(s.as_char())?;
        }
        Ok(())
    }
}

pub fn build_seed(universe: u32, stay: ChannelId, bits: u32) -> Seed {
    assert_eq!(bits, frame_bits(universe), "L must equal ceil(log2 M)");
    assert!(
        stay.0 >= 1 && stay.0 <= universe,
        "stay channel {stay} outside 1..={universe}"
    );
    let a = encode_stay_channel(stay, bits);
    let o = vec![SeedSymbol::Zero; bits as usize];
    let i = vec![SeedSymbol::One; bits as usize];
    let mut symbols = Vec::with_capacity(6 * bits as usize + 1);
    for _ in 0..2 {
        symbols.extend_from_slice(&a);
        symbols.extend_from_slice(&o);
        symbols.extend_from_slice(&i);
    }
    symbols.push(SeedSymbol::Stay);
    Seed {
        bits,
        symbols,
        stay,
    }
}

/// Column and row addressed by a timeslot, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundPosition {
    pub column: usize,
    pub row: usize,
}

/// A user's full hopping table. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZosSchedule {
    universe: u32,
    available: ChannelSet,
    seed: Seed,
    columns: Vec<ElementarySequence>,
}

/// Builds a schedule for one user. The stay channel is drawn uniformly from
/// `available` unless `stay_override` is given. Each of the first `6L`
/// columns gets an independent [`zero_one_es`] draw.
pub fn generate_schedule(
    universe: u32,
    available: &ChannelSet,
    rng: &mut RngStream,
    stay_override: Option<ChannelId>,
) -> Result<ZosSchedule> {
    if universe < 2 {
        return Err(ZosError::UniverseTooSmall(universe));
    }
    if available.is_empty() {
        return Err(ZosError::EmptyChannelSet);
    }
    if available.universe() != universe {
        return Err(ZosError::UniverseMismatch(available.universe(), universe));
    }
    let stay = match stay_override {
        Some(s) if available.contains(s) => s,
        Some(s) => return Err(ZosError::StayNotAvailable(s.0)),
        None => available.members()[rng.index(available.len())],
    };
    let bits = frame_bits(universe);
    let seed = build_seed(universe, stay, bits);
    let columns = seed
        .symbols()
        .iter()
        .map(|sym| match sym {
            SeedSymbol::Zero => zero_one_es(available, 0, rng),
            SeedSymbol::One => zero_one_es(available, 1, rng),
            SeedSymbol::Stay => ElementarySequence::stay(stay),
        })
        .collect();
    Ok(ZosSchedule {
        universe,
        available: available.clone(),
        seed,
        columns,
    })
}

/// Maps a timeslot `t >= 1` to its table cell in a schedule with the given
/// column lengths.
pub fn round_position(t: u64, column_lengths: &[usize]) -> RoundPosition {
    assert!(t >= 1, "timeslots are 1-based");
    let round = column_lengths.len() as u64;
    let column = ((t - 1) % round) as usize;
    // ceil(t / R) - 1 == (t - 1) / R for t >= 1
    let row = ((t - 1) / round % column_lengths[column] as u64) as usize;
    RoundPosition {
        column: column + 1,
        row: row + 1,
    }
}

impl ZosSchedule {
    pub fn universe(&self) -> u32 {
        self.universe
    }

    pub fn bits(&self) -> u32 {
        self.seed.bits
    }

    pub fn round_length(&self) -> u64 {
        self.columns.len() as u64
    }

    pub fn available(&self) -> &ChannelSet {
        &self.available
    }

    pub fn seed(&self) -> &Seed {
        &self.seed
    }

    pub fn stay_channel(&self) -> ChannelId {
        self.seed.stay
    }

    pub fn columns(&self) -> &[ElementarySequence] {
        &self.columns
    }

    /// 1-based column access.
    pub fn column(&self, i: usize) -> &ElementarySequence {
        &self.columns[i - 1]
    }

    pub fn position(&self, t: u64) -> RoundPosition {
        let lens: Vec<usize> = self.columns.iter().map(|c| c.len()).collect();
        round_position(t, &lens)
    }

    /// Channel visited in timeslot `t >= 1`.
    #[inline]
    pub fn channel_at(&self, t: u64) -> ChannelId {
        debug_assert!(t >= 1);
        let round = self.columns.len() as u64;
        let tm = t - 1;
        let col = &self.columns[(tm % round) as usize];
        col.items()[((tm / round) % col.len() as u64) as usize]
    }

    /// `(6L+1) * lcm(|Z_i|)`, after which the hop stream repeats.
    pub fn period(&self) -> u64 {
        let l = self
            .columns
            .iter()
            .fold(1u64, |acc, c| lcm(acc, c.len() as u64));
        self.round_length() * l
    }

    /// Line-oriented text form: a `key=value` header (M, L, available, stay,
    /// seed) followed by one line per column of space-separated channels.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "M={}", self.universe);
        let _ = writeln!(out, "L={}", self.bits());
        let avail: Vec<String> = self.available.members().iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "available={}", avail.join(" "));
        let _ = writeln!(out, "stay={}", self.stay_channel());
        let _ = writeln!(out, "seed={}", self.seed);
        for col in &self.columns {
            let row: Vec<String> = col.items().iter().map(|c| c.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
        out
    }

    /// Parses [`ZosSchedule::to_text`] output, re-checking every structural
    /// invariant.
    pub fn from_text(text: &str) -> Result<ZosSchedule> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut header = |key: &str| -> Result<(usize, String)> {
            let (n, line) = lines.next().ok_or(ZosError::Parse {
                line: 0,
                msg: format!("missing `{key}=` header"),
            })?;
            match line.split_once('=') {
                Some((k, v)) if k.trim() == key => Ok((n, v.trim().to_string())),
                _ => Err(ZosError::Parse {
                    line: n,
                    msg: format!("expected `{key}=`"),
                }),
            }
        };
        let num = |n: usize, s: &str| -> Result<u32> {
            s.parse().map_err(|_| ZosError::Parse {
                line: n,
                msg: format!("bad number `{s}`"),
            })
        };
        let (n, v) = header("M")?;
        let universe = num(n, &v)?;
        if universe < 2 {
            return Err(ZosError::UniverseTooSmall(universe));
        }
        let (n, v) = header("L")?;
        let bits = num(n, &v)?;
        if bits != frame_bits(universe) {
            return Err(ZosError::Parse {
                line: n,
                msg: format!("L={bits} but ceil(log2 {universe}) = {}", frame_bits(universe)),
            });
        }
        let (n, v) = header("available")?;
        let avail = v
            .split_whitespace()
            .map(|s| num(n, s))
            .collect::<Result<Vec<_>>>()?;
        let available = ChannelSet::new(universe, avail)?;
        let (n, v) = header("stay")?;
        let stay = ChannelId(num(n, &v)?);
        if !available.contains(stay) {
            return Err(ZosError::StayNotAvailable(stay.0));
        }
        let (n, v) = header("seed")?;
        let seed = build_seed(universe, stay, bits);
        if v.split_whitespace().collect::<Vec<_>>().join(" ") != seed.to_string() {
            return Err(ZosError::Parse {
                line: n,
                msg: "seed does not match stay channel".into(),
            });
        }
        let prime = smallest_prime_at_least(available.len() as u32) as usize;
        let mut columns = Vec::with_capacity(seed.len());
        for sym in seed.symbols() {
            let (n, line) = lines.next().ok_or(ZosError::Parse {
                line: 0,
                msg: format!("expected {} column lines", seed.len()),
            })?;
            let items = line
                .split_whitespace()
                .map(|s| num(n, s).map(ChannelId))
                .collect::<Result<Vec<_>>>()?;
            if let Some(bad) = items.iter().find(|c| !available.contains(**c)) {
                return Err(ZosError::Parse {
                    line: n,
                    msg: format!("channel {bad} not available"),
                });
            }
            let col = column_from_items(sym.kind(), prime, &items).ok_or(ZosError::Parse {
                line: n,
                msg: format!("column is not a valid {:?} sequence", sym.kind()),
            })?;
            if sym.kind() == ElementaryKind::SType && col.item(1) != stay {
                return Err(ZosError::Parse {
                    line: n,
                    msg: "s-type column must hold the stay channel".into(),
                });
            }
            columns.push(col);
        }
        if let Some((n, _)) = lines.next() {
            return Err(ZosError::Parse {
                line: n,
                msg: "trailing data after last column".into(),
            });
        }
        Ok(ZosSchedule {
            universe,
            available,
            seed,
            columns,
        })
    }
}

/// Recovers X and Y from a flat item list and rebuilds the sequence; `None`
/// if the items are not a consistent interleaving.
fn column_from_items(
    kind: ElementaryKind,
    prime: usize,
    items: &[ChannelId],
) -> Option<ElementarySequence> {
    let col = match kind {
        ElementaryKind::SType => {
            if items.len() != 1 {
                return None;
            }
            ElementarySequence::stay(items[0])
        }
        ElementaryKind::ZeroType | ElementaryKind::OneType => {
            let ylen = if kind == ElementaryKind::OneType { prime + 1 } else { prime };
            if items.len() < 2 * ylen.max(prime) {
                return None;
            }
            let x: Vec<_> = items.iter().step_by(2).take(prime).copied().collect();
            let y: Vec<_> = items.iter().skip(1).step_by(2).take(ylen).copied().collect();
            ElementarySequence::interleave(kind, prime as u32, &x, &y)
        }
    };
    (col.items() == items).then_some(col)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use SeedSymbol::{One as I1, Stay, Zero as O0};

    #[test]
    fn frame_bits_matches_ceil_log2() {
        assert_eq!(frame_bits(2), 1);
        assert_eq!(frame_bits(3), 2);
        assert_eq!(frame_bits(4), 2);
        assert_eq!(frame_bits(5), 3);
        assert_eq!(frame_bits(100), 7);
        assert_eq!(frame_bits(128), 7);
        assert_eq!(frame_bits(129), 8);
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode_stay_channel(ChannelId(1), 2), vec![O0, O0]);
        assert_eq!(encode_stay_channel(ChannelId(2), 2), vec![O0, I1]);
        assert_eq!(encode_stay_channel(ChannelId(4), 2), vec![I1, I1]);
    }

    #[test]
    #[should_panic]
    fn encode_rejects_overflow() {
        encode_stay_channel(ChannelId(5), 2);
    }

    #[test]
    fn seed_examples() {
        let seed = build_seed(3, ChannelId(2), 2);
        assert_eq!(
            seed.symbols(),
            &[O0, I1, O0, O0, I1, I1, O0, I1, O0, O0, I1, I1, Stay]
        );
        assert_eq!(seed.len(), 13);
        let seed = build_seed(2, ChannelId(1), 1);
        assert_eq!(seed.symbols(), &[O0, O0, I1, O0, O0, I1, Stay]);
        for m in 2..=40u32 {
            for s in 1..=m {
                let seed = build_seed(m, ChannelId(s), frame_bits(m));
                assert_eq!(seed.len() as u32, 6 * frame_bits(m) + 1);
            }
        }
    }

    #[test]
    fn schedule_shape_for_fig5_geometry() {
        let avail = ChannelSet::new(3, [1, 2]).unwrap();
        let s = generate_schedule(3, &avail, &mut RngStream::new(5), None).unwrap();
        assert_eq!(s.columns().len(), 13);
        for (i, col) in s.columns().iter().enumerate().take(12) {
            let expect = if s.seed().symbols()[i] == I1 { 12 } else { 4 };
            assert_eq!(col.len(), expect);
        }
        assert_eq!(s.column(13).items(), &[s.stay_channel()]);
    }

    #[test]
    fn singleton_schedule() {
        let avail = ChannelSet::new(2, [1]).unwrap();
        let s = generate_schedule(2, &avail, &mut RngStream::new(0), None).unwrap();
        for col in s.columns() {
            assert!(col.items().iter().all(|&c| c == ChannelId(1)));
        }
    }

    #[test]
    fn schedule_errors() {
        let avail = ChannelSet::new(4, [1, 2]).unwrap();
        assert_eq!(
            generate_schedule(4, &avail, &mut RngStream::new(0), Some(ChannelId(3))),
            Err(ZosError::StayNotAvailable(3))
        );
        assert_eq!(
            generate_schedule(5, &avail, &mut RngStream::new(0), None),
            Err(ZosError::UniverseMismatch(4, 5))
        );
    }

    #[test]
    fn replay_is_identical() {
        let avail = ChannelSet::new(8, [2, 3, 5, 7]).unwrap();
        let a = generate_schedule(8, &avail, &mut RngStream::new(99), Some(ChannelId(5))).unwrap();
        let b = generate_schedule(8, &avail, &mut RngStream::new(99), Some(ChannelId(5))).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn channel_at_examples() {
        let avail = ChannelSet::new(3, [1, 2, 3]).unwrap();
        let s = generate_schedule(3, &avail, &mut RngStream::new(1), None).unwrap();
        assert_eq!(s.channel_at(1), s.column(1).item(1));
        assert_eq!(s.channel_at(13), s.stay_channel());
        assert_eq!(s.channel_at(14), s.column(1).item(2));
        assert_eq!(s.position(14), RoundPosition { column: 1, row: 2 });
        assert_eq!(s.position(13), RoundPosition { column: 13, row: 1 });
    }

    #[test]
    fn text_roundtrip_and_rejects() {
        let avail = ChannelSet::new(5, [1, 4, 5]).unwrap();
        let s = generate_schedule(5, &avail, &mut RngStream::new(12), None).unwrap();
        let text = s.to_text();
        assert!(text.starts_with("M=5\nL=3\navailable=1 4 5\n"));
        assert_eq!(ZosSchedule::from_text(&text).unwrap(), s);

        let tampered = text.replacen("stay=", "stay=9", 1);
        assert!(ZosSchedule::from_text(&tampered).is_err());
        let truncated: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        assert!(ZosSchedule::from_text(&truncated).is_err());
    }
}
