//! Monte-Carlo TTR sweeps over the fraction of available channels.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Result, ZosError};
use crate::model::{ChannelSet, RngStream};
use crate::par::{self, Execution};
use crate::schedule::generate_schedule;
use crate::sim::{random_baseline_schedule, simulate_pair, HoppingSchedule, PairConfig};
use crate::verify::theorem2_bound;

pub const CSV_HEADER: [&str; 6] = ["algorithm", "theta", "trials", "avg_ttr", "max_ttr", "timeouts"];

pub const DEFAULT_THETAS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];

/// Draws `(C1, C2)` with `|C1| = m1`, `|C2| = m2` and exactly `common`
/// shared channels. Common and private channels are a uniform draw without
/// replacement from `1..=M`.
pub fn sample_channel_sets(
    universe: u32,
    m1: u32,
    m2: u32,
    common: u32,
    rng: &mut RngStream,
) -> Result<(ChannelSet, ChannelSet)> {
    let infeasible = ZosError::InfeasibleGeometry {
        universe,
        m1,
        m2,
        common,
    };
    if universe < 2 {
        return Err(ZosError::UniverseTooSmall(universe));
    }
    if common < 1 || common > m1.min(m2) || (m1 + m2 - common) > universe {
        return Err(infeasible);
    }
    // partial Fisher-Yates over the whole set
    let needed = (m1 + m2 - common) as usize;
    let mut pool: Vec<u32> = (1..=universe).collect();
    for k in 0..needed {
        let j = k + rng.index(pool.len() - k);
        pool.swap(k, j);
    }
    let g = common as usize;
    let shared = &pool[..g];
    let own1 = &pool[g..m1 as usize];
    let own2 = &pool[m1 as usize..needed];
    let c1 = ChannelSet::new(universe, shared.iter().chain(own1).copied())?;
    let c2 = ChannelSet::new(universe, shared.iter().chain(own2).copied())?;
    Ok((c1, c2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Zos,
    RandomBaseline,
}

impl Algorithm {
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Zos => "zos",
            Algorithm::RandomBaseline => "random-baseline",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = ZosError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "zos" => Ok(Algorithm::Zos),
            "random-baseline" | "random" => Ok(Algorithm::RandomBaseline),
            other => Err(ZosError::InvalidConfig(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub channels: u32,
    pub thetas: Vec<f64>,
    pub common: u32,
    pub trials: u64,
    pub master_seed: u64,
    pub algorithms: Vec<Algorithm>,
    /// Simulation horizon; `None` means `theorem2_bound + 1` for each
    /// trial's geometry.
    pub horizon: Option<u64>,
    pub exec: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            channels: 100,
            thetas: DEFAULT_THETAS.to_vec(),
            common: 6,
            trials: 5000,
            master_seed: 0,
            algorithms: vec![Algorithm::Zos, Algorithm::RandomBaseline],
            horizon: None,
            exec: Execution::default(),
        }
    }
}

impl ExperimentConfig {
    /// Channels per user for a given fraction: `round(theta * M)`.
    pub fn set_size(&self, theta: f64) -> u32 {
        (theta * self.channels as f64).round() as u32
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ZosError::InvalidConfig(msg));
        if self.channels < 2 {
            return bad(format!("--channels must be at least 2, got {}", self.channels));
        }
        if self.trials == 0 {
            return bad("--trials must be at least 1".into());
        }
        if self.thetas.is_empty() {
            return bad("--theta needs at least one value".into());
        }
        if self.algorithms.is_empty() {
            return bad("--algo needs at least one algorithm".into());
        }
        if self.common == 0 {
            return bad("--common must be at least 1".into());
        }
        if self.horizon == Some(0) {
            return bad("--horizon must be positive".into());
        }
        for &theta in &self.thetas {
            if !(theta > 0.0 && theta <= 1.0) {
                return bad(format!("theta {theta} outside (0, 1]"));
            }
            let m = self.set_size(theta);
            if self.common > m || 2 * m - self.common > self.channels {
                return Err(ZosError::InfeasibleGeometry {
                    universe: self.channels,
                    m1: m,
                    m2: m,
                    common: self.common,
                });
            }
        }
        Ok(())
    }
}

/// Aggregate over all trials of one algorithm at one theta.
#[derive(Debug, Clone, PartialEq)]
pub struct TtrStats {
    pub algorithm: Algorithm,
    pub theta: f64,
    pub trials: u64,
    /// Trials that met before the horizon.
    pub met: u64,
    pub total_ttr: u64,
    pub max_ttr: u64,
    pub timeouts: u64,
    /// `theorem2_bound(M, m, m)` for the theta's geometry.
    pub bound: u64,
}

impl TtrStats {
    /// Mean TTR over trials that met; 0 if none did.
    pub fn average_ttr(&self) -> f64 {
        if self.met == 0 {
            0.0
        } else {
            self.total_ttr as f64 / self.met as f64
        }
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TtrStats>> {
    config.validate()?;
    let mut rows = Vec::new();
    let root = RngStream::new(config.master_seed);
    for &theta in &config.thetas {
        let m = config.set_size(theta);
        let bound = theorem2_bound(config.channels, m, m);
        let horizon = config.horizon.unwrap_or(bound + 1);
        let trials: Vec<u64> = (0..config.trials).collect();
        let per_trial = par::map(config.exec, trials, |trial| {
            run_trial(config, &root, theta, m, bound, horizon, trial)
        });
        for (k, &algorithm) in config.algorithms.iter().enumerate() {
            let mut stats = TtrStats {
                algorithm,
                theta,
                trials: config.trials,
                met: 0,
                total_ttr: 0,
                max_ttr: 0,
                timeouts: 0,
                bound,
            };
            for outcome in &per_trial {
                match outcome[k] {
                    Some(ttr) => {
                        stats.met += 1;
                        stats.total_ttr += ttr;
                        stats.max_ttr = stats.max_ttr.max(ttr);
                    }
                    None => stats.timeouts += 1,
                }
            }
            rows.push(stats);
        }
    }
    Ok(rows)
}

/// One trial: shared geometry and offset, one schedule pair per algorithm.
fn run_trial(
    config: &ExperimentConfig,
    root: &RngStream,
    theta: f64,
    m: u32,
    bound: u64,
    horizon: u64,
    trial: u64,
) -> Vec<Option<u64>> {
    let stream = root.derive(&[theta.to_bits(), trial]);
    let (c1, c2) = sample_channel_sets(config.channels, m, m, config.common, &mut stream.derive(&[0]))
        .expect("geometry validated");
    let offset = stream.derive(&[1]).index(bound as usize) as u64;
    config
        .algorithms
        .iter()
        .map(|alg| {
            let (mut u1, mut u2) = (stream.derive(&[2, *alg as u64, 1]), stream.derive(&[2, *alg as u64, 2]));
            match alg {
                Algorithm::Zos => {
                    let a = generate_schedule(config.channels, &c1, &mut u1, None).expect("valid");
                    let b = generate_schedule(config.channels, &c2, &mut u2, None).expect("valid");
                    meet(&a, &b, offset, horizon)
                }
                Algorithm::RandomBaseline => {
                    let a = random_baseline_schedule(config.channels, &c1, &mut u1).expect("valid");
                    let b = random_baseline_schedule(config.channels, &c2, &mut u2).expect("valid");
                    meet(&a, &b, offset, horizon)
                }
            }
        })
        .collect()
}

fn meet<A: HoppingSchedule, B: HoppingSchedule>(a: &A, b: &B, offset: u64, horizon: u64) -> Option<u64> {
    let cfg = PairConfig::new(a, b, offset, horizon).expect("sets share G >= 1 channels");
    simulate_pair(&cfg).ttr()
}

/// Writes `algorithm,theta,trials,avg_ttr,max_ttr,timeouts` followed by one
/// row per entry. `theta` and `avg_ttr` are printed with 3 decimals.
pub fn emit_csv<W: Write>(stats: &[TtrStats], destination: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(destination);
    w.write_record(CSV_HEADER)?;
    for s in stats {
        w.write_record([
            s.algorithm.label().to_string(),
            format!("{:.3}", s.theta),
            s.trials.to_string(),
            format!("{:.3}", s.average_ttr()),
            s.max_ttr.to_string(),
            s.timeouts.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub algorithm: String,
    pub theta: f64,
    pub trials: u64,
    pub avg_ttr: f64,
    pub max_ttr: u64,
    pub timeouts: u64,
}

pub fn parse_csv<R: Read>(source: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(source);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(ZosError::Csv(format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let num_err = |k: usize| ZosError::Parse {
            line,
            msg: format!("bad {} `{}`", CSV_HEADER[k], field(k)),
        };
        rows.push(CsvRow {
            algorithm: field(0).to_string(),
            theta: field(1).parse().map_err(|_| num_err(1))?,
            trials: field(2).parse().map_err(|_| num_err(2))?,
            avg_ttr: field(3).parse().map_err(|_| num_err(3))?,
            max_ttr: field(4).parse().map_err(|_| num_err(4))?,
            timeouts: field(5).parse().map_err(|_| num_err(5))?,
        });
    }
    Ok(rows)
}
