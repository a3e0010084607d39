use proptest::prelude::*;

use zos::model::{random_permutation, ChannelId, ChannelSet, RngStream};
use zos::schedule::{generate_schedule, ZosSchedule};
use zos::sim::{simulate_pair, PairConfig, RendezvousResult};
use zos::{zero_one_es, ElementaryKind};

fn any_set(universe: u32) -> impl Strategy<Value = ChannelSet> {
    prop::collection::btree_set(1..=universe, 1..=universe.min(8) as usize)
        .prop_map(move |s| ChannelSet::new(universe, s).unwrap())
}

fn universe_and_set() -> impl Strategy<Value = (u32, ChannelSet)> {
    (2u32..=24).prop_flat_map(|m| (Just(m), any_set(m)))
}

/// Hop stream obtained by walking the table row by row, independent of
/// `channel_at`'s index arithmetic.
fn table_walk(s: &ZosSchedule, slots: usize) -> Vec<ChannelId> {
    let mut out = Vec::with_capacity(slots);
    let mut row = 0usize;
    while out.len() < slots {
        for col in s.columns() {
            out.push(col.items()[row % col.len()]);
            if out.len() == slots {
                break;
            }
        }
        row += 1;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hops_stay_inside_available((m, set) in universe_and_set(), seed in any::<u64>()) {
        let s = generate_schedule(m, &set, &mut RngStream::new(seed), None).unwrap();
        let period = s.round_length() * 7;
        for t in 1..=period {
            prop_assert!(set.contains(s.channel_at(t)));
        }
    }

    #[test]
    fn table_walk_matches_channel_at((m, set) in universe_and_set(), seed in any::<u64>()) {
        let s = generate_schedule(m, &set, &mut RngStream::new(seed), None).unwrap();
        let walk = table_walk(&s, 2000);
        for (k, c) in walk.iter().enumerate() {
            prop_assert_eq!(s.channel_at(k as u64 + 1), *c);
        }
    }

    #[test]
    fn columns_cycle_and_stay_slots((m, set) in universe_and_set(), seed in any::<u64>(), t0 in 1u64..200) {
        let s = generate_schedule(m, &set, &mut RngStream::new(seed), None).unwrap();
        let r = s.round_length();
        let i = ((t0 - 1) % r) as usize + 1;
        let col = s.column(i);
        let first_row = ((t0 - 1) / r) as usize;
        for k in 0..(2 * col.len()) {
            let t = t0 + k as u64 * r;
            prop_assert_eq!(s.channel_at(t), col.items()[(first_row + k) % col.len()]);
        }
        for round in 1..=30u64 {
            prop_assert_eq!(s.channel_at(round * r), s.stay_channel());
        }
        prop_assert!(set.contains(s.stay_channel()));
    }

    #[test]
    fn schedule_period_holds((m, set) in (2u32..=6).prop_flat_map(|m| (Just(m), any_set(m))), seed in any::<u64>()) {
        let s = generate_schedule(m, &set, &mut RngStream::new(seed), None).unwrap();
        let p = s.period();
        for t in 1..=p.min(5000) {
            prop_assert_eq!(s.channel_at(t), s.channel_at(t + p));
        }
    }

    #[test]
    fn column_kinds_follow_seed((m, set) in universe_and_set(), seed in any::<u64>()) {
        let s = generate_schedule(m, &set, &mut RngStream::new(seed), None).unwrap();
        let l = s.bits() as usize;
        prop_assert_eq!(s.columns().len(), 6 * l + 1);
        for (sym, col) in s.seed().symbols().iter().zip(s.columns()) {
            let expect = match sym {
                zos::SeedSymbol::Zero => ElementaryKind::ZeroType,
                zos::SeedSymbol::One => ElementaryKind::OneType,
                zos::SeedSymbol::Stay => ElementaryKind::SType,
            };
            prop_assert_eq!(col.kind(), expect);
        }
        let sym = s.seed().symbols();
        prop_assert_eq!(&sym[..3 * l], &sym[3 * l..6 * l]);
        prop_assert!(sym[l..2 * l].iter().all(|&x| x == zos::SeedSymbol::Zero));
        prop_assert!(sym[2 * l..3 * l].iter().all(|&x| x == zos::SeedSymbol::One));
    }

    #[test]
    fn text_form_roundtrips((m, set) in universe_and_set(), seed in any::<u64>()) {
        let s = generate_schedule(m, &set, &mut RngStream::new(seed), None).unwrap();
        prop_assert_eq!(ZosSchedule::from_text(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn offset_shift_matches_stream_zip(
        (m, c1, c2) in (2u32..=12).prop_flat_map(|m| (Just(m), any_set(m), any_set(m)))
            .prop_filter("sets must intersect", |(_, a, b)| a.intersects(b)),
        seed in any::<u64>(),
        offset in 0u64..500,
    ) {
        let root = RngStream::new(seed);
        let a = generate_schedule(m, &c1, &mut root.derive(&[1]), None).unwrap();
        let b = generate_schedule(m, &c2, &mut root.derive(&[2]), None).unwrap();
        let slots = 1000usize;
        let w1 = table_walk(&a, slots);
        let w2 = table_walk(&b, slots + offset as usize);
        let oracle = (0..slots).find(|&k| w1[k] == w2[k + offset as usize]);
        let got = simulate_pair(&PairConfig::new(&a, &b, offset, slots as u64).unwrap());
        match oracle {
            Some(k) => prop_assert_eq!(got, RendezvousResult::Met { ttr: k as u64 + 1, channel: w1[k] }),
            None => prop_assert_eq!(got, RendezvousResult::Timeout { horizon: slots as u64 }),
        }
        if let RendezvousResult::Met { channel, ttr } = got {
            prop_assert!(c1.contains(channel) && c2.contains(channel));
            // longer horizons do not change an outcome that was already met
            for h in [ttr, ttr + 1, 10 * slots as u64] {
                prop_assert_eq!(simulate_pair(&PairConfig::new(&a, &b, offset, h).unwrap()), got);
            }
        }
        prop_assert_eq!(simulate_pair(&PairConfig::new(&a, &b, offset, slots as u64).unwrap()), got);
    }

    #[test]
    fn elementary_windows_cover(set in any_set(40), b in 0u8..=1, seed in any::<u64>()) {
        let z = zero_one_es(&set, b, &mut RngStream::new(seed));
        let p = z.prime().unwrap() as usize;
        let odd: Vec<_> = z.items().iter().step_by(2).copied().collect();
        let even: Vec<_> = z.items().iter().skip(1).step_by(2).copied().collect();
        // windows may wrap around the end of Z since the sequence repeats
        for (stream, w) in [(&odd, p), (&even, p + b as usize)] {
            for start in 0..stream.len() {
                let seen: std::collections::BTreeSet<_> =
                    (0..w).map(|k| stream[(start + k) % stream.len()]).collect();
                prop_assert_eq!(seen.len(), set.len());
            }
        }
    }
}

#[test]
fn permutation_sorted_equals_members() {
    for size in 1..=12u32 {
        let set = ChannelSet::new(20, (1..=size).map(|k| (k * 7) % 20 + 1)).unwrap();
        for seed in 0..100 {
            let mut p = random_permutation(&set, &mut RngStream::new(seed));
            p.sort();
            assert_eq!(p, set.members());
        }
    }
}

#[test]
fn replaying_a_seed_reproduces_everything() {
    let set = ChannelSet::new(30, [2, 5, 7, 11, 13, 17, 19, 23]).unwrap();
    for seed in 0..20 {
        let a = generate_schedule(30, &set, &mut RngStream::new(seed), None).unwrap();
        let b = generate_schedule(30, &set, &mut RngStream::new(seed), None).unwrap();
        assert_eq!(a.to_text(), b.to_text());
    }
}
