//! ZOS blind rendezvous for cognitive radios.
//!
//! A user hops over its *available* channels according to a table of
//! elementary sequences selected by a seed derived from a randomly chosen
//! stay channel. Two users running ZOS are guaranteed to land on a common
//! channel in the same timeslot within a bound that depends only on the
//! sizes of their available sets and on `ceil(log2 M)`.
//!
//! Module map:
//!
//! * [`model`]: channel ids and sets, prime search, deterministic rng streams.
//! * [`elementary`]: 0-type and 1-type elementary sequences.
//! * [`schedule`]: seeds, hopping schedules and their text form.
//! * [`sim`]: pairwise timeslot simulation and a random-hopping baseline.
//! * [`verify`]: bound formulas and exhaustive bound checks.
//! * [`experiment`]: Monte-Carlo TTR sweeps and CSV output.
//! * [`par`]: parallel/sequential execution switch.

pub mod elementary;
pub mod error;
pub mod experiment;
pub mod model;
pub mod par;
pub mod schedule;
pub mod sim;
pub mod verify;

pub use elementary::{zero_one_es, ElementaryKind, ElementarySequence};
pub use error::{Result, ZosError};
pub use experiment::{
    emit_csv, parse_csv, run_experiment, sample_channel_sets, Algorithm, CsvRow,
    ExperimentConfig, TtrStats,
};
pub use model::{
    random_permutation, random_selection, smallest_prime_at_least, ChannelId, ChannelSet,
    RngStream,
};
pub use par::Execution;
pub use schedule::{
    build_seed, encode_stay_channel, generate_schedule, round_position, RoundPosition, Seed,
    SeedSymbol, ZosSchedule,
};
pub use sim::{
    random_baseline_schedule, simulate_elementary_pair, simulate_pair, BaselineSchedule,
    HoppingSchedule, PairConfig, RendezvousResult,
};
pub use verify::{
    check_crt_alignment, seed_windows_distinct, theorem1_bound, theorem2_bound, verify_theorem1,
    verify_theorem2, verify_theorem2_with, BoundReport, OffsetSweep, Theorem1Report,
    Theorem2Options, Theorem2Report, Witness,
};
