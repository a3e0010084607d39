//! Rendezvous bounds and the exhaustive checks behind them.
//!
//! The two sweeps here ([`verify_theorem1`] and [`verify_theorem2`]) run the
//! simulator over every clock offset in a range and compare the worst TTR
//! against the closed-form bound. Any failure carries a [`Witness`] that is
//! enough to replay it: the rng seed, both channel sets, both stay channels
//! and the offset.

use std::fmt;

use crate::elementary::zero_one_es;
use crate::experiment::sample_channel_sets;
use crate::model::{smallest_prime_at_least, ChannelId, ChannelSet, RngStream};
use crate::par::{self, Execution};
use crate::schedule::{build_seed, frame_bits, generate_schedule, lcm, round_length, SeedSymbol};
use crate::sim::{simulate_elementary_pair, simulate_pair, PairConfig, RendezvousResult};

/// `2 (P1 + 1) P2`: 1-type over a set of size `m1` against 0-type over a set
/// of size `m2`.
pub fn theorem1_bound(m1: u32, m2: u32) -> u64 {
    let p1 = smallest_prime_at_least(m1) as u64;
    let p2 = smallest_prime_at_least(m2) as u64;
    2 * (p1 + 1) * p2
}

/// `(12L + 2)(P1 P2 + max(P1, P2))` with `L = ceil(log2 M)`.
pub fn theorem2_bound(universe: u32, m1: u32, m2: u32) -> u64 {
    let l = frame_bits(universe) as u64;
    let p1 = smallest_prime_at_least(m1) as u64;
    let p2 = smallest_prime_at_least(m2) as u64;
    let tight = (12 * l + 2) * (p1 * p2 + p1.max(p2));
    let (a, b) = (m1 as u64, m2 as u64);
    let loose = (24 * l + 4) * (2 * a * b + a.max(b));
    assert!(tight <= loose, "tight bound {tight} exceeds loose bound {loose}");
    tight
}

/// Case-2 (equal stay channels) bound `2 P1 (6L + 1)`.
pub fn same_stay_bound(universe: u32, m1: u32) -> u64 {
    2 * smallest_prime_at_least(m1) as u64 * round_length(frame_bits(universe))
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Builds `U = <1..p>` repeated `q` times and `V = <1..q>` repeated `p`
/// times and checks that every pair `(u_i, v_j)` shows up at a common index
/// `k <= pq`. Panics unless `gcd(p, q) = 1`.
pub fn check_crt_alignment(p: u64, q: u64) -> bool {
    assert!(p >= 1 && q >= 1, "p and q must be positive");
    assert_eq!(gcd(p, q), 1, "p={p} and q={q} must be coprime");
    let u: Vec<u64> = (0..q).flat_map(|_| 1..=p).collect();
    let v: Vec<u64> = (0..p).flat_map(|_| 1..=q).collect();
    let mut hit = vec![false; (p * q) as usize];
    for (a, b) in u.iter().zip(&v) {
        hit[((a - 1) * q + (b - 1)) as usize] = true;
    }
    hit.into_iter().all(|h| h)
}

/// For two distinct stay channels, every pair of length-`3L` windows taken
/// from the binary part of the two seeds, starting at `i, j` in `1..=3L`,
/// differs somewhere.
pub fn seed_windows_distinct(universe: u32, s1: ChannelId, s2: ChannelId) -> bool {
    let bits = frame_bits(universe);
    let d1 = build_seed(universe, s1, bits);
    let d2 = build_seed(universe, s2, bits);
    let w = 3 * bits as usize;
    let (a, b) = (&d1.symbols()[..2 * w], &d2.symbols()[..2 * w]);
    debug_assert!(a.iter().chain(b).all(|&s| s != SeedSymbol::Stay));
    (0..w).all(|i| (0..w).all(|j| a[i..i + w] != b[j..j + w]))
}

/// [`seed_windows_distinct`] over every ordered pair `s1 != s2` in `1..=M`.
pub fn all_seed_windows_distinct(universe: u32) -> bool {
    (1..=universe).all(|s1| {
        (1..=universe)
            .filter(|&s2| s2 != s1)
            .all(|s2| seed_windows_distinct(universe, ChannelId(s1), ChannelId(s2)))
    })
}

/// Everything needed to replay one simulated configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub seed: u64,
    pub c1: ChannelSet,
    pub c2: ChannelSet,
    pub stays: Option<(ChannelId, ChannelId)>,
    pub offset: u64,
    pub result: RendezvousResult,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seed={} C1={} C2={}", self.seed, self.c1, self.c2)?;
        if let Some((s1, s2)) = self.stays {
            write!(f, " s1={s1} s2={s2}")?;
        }
        write!(f, " offset={} -> ", self.offset)?;
        match self.result {
            RendezvousResult::Met { ttr, channel } => write!(f, "met at t={ttr} on {channel}"),
            RendezvousResult::Timeout { horizon } => write!(f, "timeout after {horizon}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub description: String,
    pub bound: u64,
    pub worst_observed_ttr: u64,
    pub offsets_checked: u64,
    pub trials: u64,
    pub timeouts: u64,
    /// Configuration that produced `worst_observed_ttr`.
    pub worst: Option<Witness>,
    /// First configuration that timed out or exceeded the bound.
    pub failure: Option<Witness>,
    pub pass: bool,
}

impl BoundReport {
    fn new(description: String, bound: u64) -> Self {
        BoundReport {
            description,
            bound,
            worst_observed_ttr: 0,
            offsets_checked: 0,
            trials: 0,
            timeouts: 0,
            worst: None,
            failure: None,
            pass: true,
        }
    }

    fn absorb(&mut self, ctx: &JobContext, sweep: &Sweep) {
        self.trials += 1;
        self.offsets_checked += sweep.offsets;
        self.timeouts += sweep.timeouts;
        if let Some((ttr, offset, result)) = sweep.worst {
            if self.worst.is_none() || ttr > self.worst_observed_ttr {
                self.worst_observed_ttr = ttr;
                self.worst = Some(ctx.witness(offset, result));
            }
        }
        if self.failure.is_none() {
            if let Some((offset, result)) = sweep.failure {
                self.failure = Some(ctx.witness(offset, result));
            }
        }
        self.pass = self.timeouts == 0 && self.worst_observed_ttr <= self.bound;
    }

    /// Folds another report over a possibly different bound into this one.
    /// The merged bound is the maximum of the two.
    pub fn merge(&mut self, other: &BoundReport) {
        self.trials += other.trials;
        self.offsets_checked += other.offsets_checked;
        self.timeouts += other.timeouts;
        if other.worst_observed_ttr > self.worst_observed_ttr || self.worst.is_none() {
            self.worst_observed_ttr = self.worst_observed_ttr.max(other.worst_observed_ttr);
            if other.worst.is_some() {
                self.worst = other.worst.clone();
            }
        }
        if self.failure.is_none() {
            self.failure = other.failure.clone();
        }
        self.pass = self.pass && other.pass;
        self.bound = self.bound.max(other.bound);
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: worst TTR {} vs bound {} ({} trials, {} offsets, {} timeouts)",
            if self.pass { "PASS" } else { "FAIL" },
            self.description,
            self.worst_observed_ttr,
            self.bound,
            self.trials,
            self.offsets_checked,
            self.timeouts
        )?;
        if let Some(w) = &self.failure {
            write!(f, "\n    failure: {w}")?;
        }
        Ok(())
    }
}

struct JobContext {
    seed: u64,
    c1: ChannelSet,
    c2: ChannelSet,
    stays: Option<(ChannelId, ChannelId)>,
}

impl JobContext {
    fn witness(&self, offset: u64, result: RendezvousResult) -> Witness {
        Witness {
            seed: self.seed,
            c1: self.c1.clone(),
            c2: self.c2.clone(),
            stays: self.stays,
            offset,
            result,
        }
    }
}

/// Offset-sweep tally for one job against one bound.
#[derive(Default)]
struct Sweep {
    offsets: u64,
    timeouts: u64,
    worst: Option<(u64, u64, RendezvousResult)>,
    failure: Option<(u64, RendezvousResult)>,
}

impl Sweep {
    fn record(&mut self, offset: u64, result: RendezvousResult, bound: u64) {
        self.offsets += 1;
        match result.ttr() {
            Some(ttr) => {
                if self.worst.is_none_or(|(w, _, _)| ttr > w) {
                    self.worst = Some((ttr, offset, result));
                }
                if ttr > bound && self.failure.is_none() {
                    self.failure = Some((offset, result));
                }
            }
            None => {
                self.timeouts += 1;
                if self.failure.is_none() {
                    self.failure = Some((offset, result));
                }
            }
        }
    }
}

/// Picks a random overlap and samples an intersecting pair of sets.
fn sample_pair(universe: u32, m1: u32, m2: u32, rng: &mut RngStream) -> (ChannelSet, ChannelSet) {
    let lo = 1.max((m1 + m2).saturating_sub(universe));
    let hi = m1.min(m2);
    assert!(
        lo <= hi && m1.max(m2) <= universe,
        "m1={m1}, m2={m2} cannot intersect inside M={universe}"
    );
    let common = lo + rng.index((hi - lo + 1) as usize) as u32;
    sample_channel_sets(universe, m1, m2, common, rng).expect("feasible geometry")
}

fn subsets_of_size(universe: u32, k: u32) -> Vec<ChannelSet> {
    assert!(universe <= 16, "subset enumeration limited to M <= 16");
    (1u64..1 << universe)
        .filter(|m| m.count_ones() == k)
        .map(|m| ChannelSet::from_mask(universe, m).expect("nonempty mask"))
        .collect()
}

/// Every intersecting `(C1, C2)` with `|C1| = m1`, `|C2| = m2`.
pub fn intersecting_pairs(universe: u32, m1: u32, m2: u32) -> Vec<(ChannelSet, ChannelSet)> {
    let a = subsets_of_size(universe, m1);
    let b = subsets_of_size(universe, m2);
    let mut out = Vec::new();
    for c1 in &a {
        for c2 in &b {
            if c1.intersects(c2) {
                out.push((c1.clone(), c2.clone()));
            }
        }
    }
    out
}

/// Both orientations of the 1-type vs 0-type sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem1Report {
    /// 1-type over `C1` against 0-type over `C2`, bound `2(P1+1)P2`.
    pub forward: BoundReport,
    /// 0-type over `C1` against 1-type over `C2`, bound `2(P2+1)P1`.
    pub swapped: BoundReport,
}

impl Theorem1Report {
    pub fn pass(&self) -> bool {
        self.forward.pass && self.swapped.pass
    }
}

impl fmt::Display for Theorem1Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\n{}", self.forward, self.swapped)
    }
}

/// For each seed, samples one intersecting `(C1, C2)` pair inside `1..=M`
/// and sweeps every offset in one joint period of the two elementary
/// sequences.
pub fn verify_theorem1(m1: u32, m2: u32, rng_seeds: &[u64], universe: u32) -> Theorem1Report {
    verify_theorem1_with(m1, m2, rng_seeds, universe, Execution::default())
}

pub fn verify_theorem1_with(
    m1: u32,
    m2: u32,
    rng_seeds: &[u64],
    universe: u32,
    exec: Execution,
) -> Theorem1Report {
    let fwd_bound = theorem1_bound(m1, m2);
    let swp_bound = theorem1_bound(m2, m1);
    let jobs: Vec<u64> = rng_seeds.to_vec();
    let outcomes = par::map(exec, jobs, |seed| {
        let root = RngStream::new(seed);
        let (c1, c2) = sample_pair(universe, m1, m2, &mut root.derive(&[0]));
        let one_1 = zero_one_es(&c1, 1, &mut root.derive(&[1]));
        let zero_1 = zero_one_es(&c1, 0, &mut root.derive(&[2]));
        let one_2 = zero_one_es(&c2, 1, &mut root.derive(&[3]));
        let zero_2 = zero_one_es(&c2, 0, &mut root.derive(&[4]));

        let mut fwd = Sweep::default();
        for offset in 0..lcm(one_1.len() as u64, zero_2.len() as u64) {
            fwd.record(
                offset,
                simulate_elementary_pair(&one_1, &zero_2, offset, fwd_bound),
                fwd_bound,
            );
        }
        let mut swp = Sweep::default();
        for offset in 0..lcm(zero_1.len() as u64, one_2.len() as u64) {
            swp.record(
                offset,
                simulate_elementary_pair(&zero_1, &one_2, offset, swp_bound),
                swp_bound,
            );
        }
        let ctx = JobContext {
            seed,
            c1,
            c2,
            stays: None,
        };
        (ctx, fwd, swp)
    });
    let mut forward = BoundReport::new(
        format!("1-type(m1={m1}) vs 0-type(m2={m2}), M={universe}"),
        fwd_bound,
    );
    let mut swapped = BoundReport::new(
        format!("0-type(m1={m1}) vs 1-type(m2={m2}), M={universe}"),
        swp_bound,
    );
    for (ctx, fwd, swp) in &outcomes {
        forward.absorb(ctx, fwd);
        swapped.absorb(ctx, swp);
    }
    Theorem1Report { forward, swapped }
}

/// Which clock offsets a ZOS/ZOS sweep visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OffsetSweep {
    /// Every offset in `0..=bound`.
    All,
    /// Offset 0 plus this many uniform draws from `0..=bound`.
    Sampled(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Theorem2Options {
    /// Enumerate every intersecting set pair (only honored for `M <= 8`).
    pub exhaustive_sets: bool,
    /// Set pairs sampled per seed when not enumerating.
    pub pairs_per_seed: u32,
    pub offsets: OffsetSweep,
    /// Extend `OffsetSweep::All` to cover one full period of user 2's
    /// schedule when that period exceeds the bound.
    pub full_period: bool,
    pub exec: Execution,
}

impl Default for Theorem2Options {
    fn default() -> Self {
        Theorem2Options {
            exhaustive_sets: false,
            pairs_per_seed: 1,
            offsets: OffsetSweep::All,
            full_period: false,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Theorem2Report {
    /// All regimes against `(12L+2)(P1P2 + max(P1,P2))`.
    pub general: BoundReport,
    /// Equal stay channels against `2 P1 (6L+1)`.
    pub same_stay: BoundReport,
    /// Equal stay channels, offset a multiple of `6L+1`, against `6L+1`.
    pub aligned: BoundReport,
    /// Jobs where distinct stay channels were infeasible (`C1 = C2`
    /// singleton).
    pub skipped_distinct: u64,
}

impl Theorem2Report {
    pub fn pass(&self) -> bool {
        self.general.pass && self.same_stay.pass && self.aligned.pass
    }

    pub fn merge(&mut self, other: &Theorem2Report) {
        self.general.merge(&other.general);
        self.same_stay.merge(&other.same_stay);
        self.aligned.merge(&other.aligned);
        self.skipped_distinct += other.skipped_distinct;
    }
}

impl fmt::Display for Theorem2Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\n{}\n{}", self.general, self.same_stay, self.aligned)?;
        if self.skipped_distinct > 0 {
            write!(
                f,
                "\n    skipped distinct-stay regime for {} singleton C1 = C2 jobs",
                self.skipped_distinct
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum StayRegime {
    Distinct,
    Equal,
}

fn pick_stays(
    c1: &ChannelSet,
    c2: &ChannelSet,
    regime: StayRegime,
    rng: &mut RngStream,
) -> Option<(ChannelId, ChannelId)> {
    match regime {
        StayRegime::Equal => {
            let common = c1.intersection(c2);
            let s = common[rng.index(common.len())];
            Some((s, s))
        }
        StayRegime::Distinct => {
            let options: Vec<_> = c1
                .members()
                .iter()
                .flat_map(|&a| c2.members().iter().map(move |&b| (a, b)))
                .filter(|(a, b)| a != b)
                .collect();
            if options.is_empty() {
                None
            } else {
                Some(options[rng.index(options.len())])
            }
        }
    }
}

/// ZOS against ZOS with horizon equal to the bound, over both stay-channel
/// regimes and every offset in `0..=bound`.
pub fn verify_theorem2(
    universe: u32,
    m1: u32,
    m2: u32,
    rng_seeds: &[u64],
    exhaustive_sets: bool,
) -> Theorem2Report {
    let opts = Theorem2Options {
        exhaustive_sets,
        ..Theorem2Options::default()
    };
    verify_theorem2_with(universe, m1, m2, rng_seeds, &opts)
}

pub fn verify_theorem2_with(
    universe: u32,
    m1: u32,
    m2: u32,
    rng_seeds: &[u64],
    opts: &Theorem2Options,
) -> Theorem2Report {
    assert!(m1 >= 1 && m2 >= 1 && m1.max(m2) <= universe);
    let bound = theorem2_bound(universe, m1, m2);
    let case2 = same_stay_bound(universe, m1);
    let round = round_length(frame_bits(universe));

    let enumerated = (opts.exhaustive_sets && universe <= 8)
        .then(|| intersecting_pairs(universe, m1, m2));
    let pairs_per_seed = enumerated
        .as_ref()
        .map_or(opts.pairs_per_seed.max(1) as usize, Vec::len);

    let mut jobs = Vec::new();
    for &seed in rng_seeds {
        for pair in 0..pairs_per_seed {
            for regime in [StayRegime::Distinct, StayRegime::Equal] {
                jobs.push((seed, pair, regime));
            }
        }
    }

    let outcomes = par::map(opts.exec, jobs, |(seed, pair, regime)| {
        let root = RngStream::new(seed).derive(&[pair as u64]);
        let (c1, c2) = match &enumerated {
            Some(all) => all[pair].clone(),
            None => sample_pair(universe, m1, m2, &mut root.derive(&[0])),
        };
        let job = root.derive(&[1 + regime as u64]);
        let stays = pick_stays(&c1, &c2, regime, &mut job.derive(&[0]))?;
        let a = generate_schedule(universe, &c1, &mut job.derive(&[1]), Some(stays.0))
            .expect("valid schedule");
        let b = generate_schedule(universe, &c2, &mut job.derive(&[2]), Some(stays.1))
            .expect("valid schedule");

        let offsets: Vec<u64> = match opts.offsets {
            OffsetSweep::All => {
                let end = if opts.full_period {
                    (bound + 1).max(b.period())
                } else {
                    bound + 1
                };
                (0..end).collect()
            }
            OffsetSweep::Sampled(n) => {
                let mut r = job.derive(&[3]);
                std::iter::once(0)
                    .chain((0..n).map(|_| r.index(bound as usize + 1) as u64))
                    .collect()
            }
        };

        let mut general = Sweep::default();
        let mut same = Sweep::default();
        let mut aligned = Sweep::default();
        for offset in offsets {
            let cfg = PairConfig::new(&a, &b, offset, bound).expect("intersecting pair");
            let r = simulate_pair(&cfg);
            general.record(offset, r, bound);
            if regime == StayRegime::Equal {
                same.record(offset, r, case2);
                if offset % round == 0 {
                    aligned.record(offset, r, round);
                }
            }
        }
        let ctx = JobContext {
            seed,
            c1,
            c2,
            stays: Some(stays),
        };
        Some((ctx, regime, general, same, aligned))
    });

    let geometry = format!("M={universe} m1={m1} m2={m2}");
    let mut report = Theorem2Report {
        general: BoundReport::new(format!("ZOS/ZOS {geometry}"), bound),
        same_stay: BoundReport::new(format!("equal stay {geometry}"), case2),
        aligned: BoundReport::new(format!("equal stay, round-aligned {geometry}"), round),
        skipped_distinct: 0,
    };
    for outcome in &outcomes {
        match outcome {
            None => report.skipped_distinct += 1,
            Some((ctx, regime, general, same, aligned)) => {
                report.general.absorb(ctx, general);
                if *regime == StayRegime::Equal {
                    report.same_stay.absorb(ctx, same);
                    if aligned.offsets > 0 {
                        report.aligned.absorb(ctx, aligned);
                    }
                }
            }
        }
    }
    report
}
