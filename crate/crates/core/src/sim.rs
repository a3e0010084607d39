//! Pairwise timeslot simulation.
//!
//! Both users share slot boundaries. User 2 started `offset` slots before
//! user 1, so in user 1's slot `t` user 2 is in its own slot `t + offset`.
//! TTR is counted in user 1's slots, starting at 1.

use crate::elementary::ElementarySequence;
use crate::error::{Result, ZosError};
use crate::model::{derive_seed, ChannelId, ChannelSet, RngStream};
use crate::schedule::ZosSchedule;

/// Anything that maps a 1-based timeslot to a channel of its available set.
pub trait HoppingSchedule {
    fn channel_at(&self, t: u64) -> ChannelId;
    fn available(&self) -> &ChannelSet;

    fn universe(&self) -> u32 {
        self.available().universe()
    }
}

impl HoppingSchedule for ZosSchedule {
    #[inline]
    fn channel_at(&self, t: u64) -> ChannelId {
        ZosSchedule::channel_at(self, t)
    }

    fn available(&self) -> &ChannelSet {
        ZosSchedule::available(self)
    }
}

/// Random hopping: every slot is an independent uniform pick from the
/// available set, computed by hashing `(seed, t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineSchedule {
    available: ChannelSet,
    seed: u64,
}

impl BaselineSchedule {
    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl HoppingSchedule for BaselineSchedule {
    #[inline]
    fn channel_at(&self, t: u64) -> ChannelId {
        let h = derive_seed(self.seed, &[t]);
        let m = self.available.len() as u64;
        // multiply-high reduction; bias is at most m / 2^64
        let idx = ((h as u128 * m as u128) >> 64) as usize;
        self.available.members()[idx]
    }

    fn available(&self) -> &ChannelSet {
        &self.available
    }
}

pub fn random_baseline_schedule(
    universe: u32,
    available: &ChannelSet,
    rng: &mut RngStream,
) -> Result<BaselineSchedule> {
    if available.is_empty() {
        return Err(ZosError::EmptyChannelSet);
    }
    if available.universe() != universe {
        return Err(ZosError::UniverseMismatch(available.universe(), universe));
    }
    Ok(BaselineSchedule {
        available: available.clone(),
        seed: rand::RngCore::next_u64(rng),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RendezvousResult {
    Met { ttr: u64, channel: ChannelId },
    Timeout { horizon: u64 },
}

impl RendezvousResult {
    pub fn ttr(&self) -> Option<u64> {
        match *self {
            RendezvousResult::Met { ttr, .. } => Some(ttr),
            RendezvousResult::Timeout { .. } => None,
        }
    }

    pub fn is_met(&self) -> bool {
        matches!(self, RendezvousResult::Met { .. })
    }
}

/// Two schedules plus their relative clock offset.
#[derive(Debug, Clone, Copy)]
pub struct PairConfig<'a, A, B> {
    first: &'a A,
    second: &'a B,
    offset: u64,
    horizon: u64,
}

impl<'a, A: HoppingSchedule, B: HoppingSchedule> PairConfig<'a, A, B> {
    pub fn new(first: &'a A, second: &'a B, offset: u64, horizon: u64) -> Result<Self> {
        if first.universe() != second.universe() {
            return Err(ZosError::UniverseMismatch(first.universe(), second.universe()));
        }
        if !first.available().intersects(second.available()) {
            return Err(ZosError::DisjointSets);
        }
        if horizon == 0 {
            return Err(ZosError::InvalidConfig("horizon must be positive".into()));
        }
        Ok(PairConfig {
            first,
            second,
            offset,
            horizon,
        })
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }
}

#[inline]
fn first_meeting(
    first: impl Fn(u64) -> ChannelId,
    second: impl Fn(u64) -> ChannelId,
    offset: u64,
    horizon: u64,
) -> RendezvousResult {
    for t in 1..=horizon {
        let c = first(t);
        if c == second(t + offset) {
            return RendezvousResult::Met { ttr: t, channel: c };
        }
    }
    RendezvousResult::Timeout { horizon }
}

pub fn simulate_pair<A: HoppingSchedule, B: HoppingSchedule>(
    config: &PairConfig<'_, A, B>,
) -> RendezvousResult {
    first_meeting(
        |t| config.first.channel_at(t),
        |t| config.second.channel_at(t),
        config.offset,
        config.horizon,
    )
}

/// Both users repeat one elementary sequence forever. Intended for a 1-type
/// sequence against a 0-type one.
pub fn simulate_elementary_pair(
    seq_1: &ElementarySequence,
    seq_2: &ElementarySequence,
    offset: u64,
    horizon: u64,
) -> RendezvousResult {
    first_meeting(|t| seq_1.cyclic(t), |t| seq_2.cyclic(t), offset, horizon)
}
