use thiserror::Error;

pub type Result<T, E = ZosError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ZosError {
    #[error("channel set is empty")]
    EmptyChannelSet,

    #[error("whole channel set must have at least 2 channels, got {0}")]
    UniverseTooSmall(u32),

    #[error("channel {index} outside 1..={universe}")]
    ChannelOutOfRange { index: u32, universe: u32 },

    #[error("channel {0} listed more than once")]
    DuplicateChannel(u32),

    #[error("stay channel {0} is not in the available set")]
    StayNotAvailable(u32),

    #[error("schedules are over different channel universes ({0} vs {1})")]
    UniverseMismatch(u32, u32),

    #[error("available channel sets do not intersect")]
    DisjointSets,

    #[error("infeasible set geometry: M={universe}, m1={m1}, m2={m2}, G={common}")]
    InfeasibleGeometry {
        universe: u32,
        m1: u32,
        m2: u32,
        common: u32,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("csv: {0}")]
    Csv(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for ZosError {
    fn from(e: std::io::Error) -> Self {
        ZosError::Io(e.to_string())
    }
}

impl From<csv::Error> for ZosError {
    fn from(e: csv::Error) -> Self {
        ZosError::Csv(e.to_string())
    }
}
