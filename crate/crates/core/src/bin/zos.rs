//! `zos`: generate schedules, simulate pairs, run the bound checks and
//! Monte-Carlo sweeps.
//!
//! Every flag can also come from a `key=value` file passed with `--config`
//! (keys are the long flag names without dashes). Flags win over the file.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid configuration.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use zos::experiment::{emit_csv, run_experiment, Algorithm, ExperimentConfig, DEFAULT_THETAS};
use zos::model::{smallest_prime_at_least, ChannelId, ChannelSet, RngStream};
use zos::sim::{random_baseline_schedule, simulate_pair, PairConfig, RendezvousResult};
use zos::verify::{
    all_seed_windows_distinct, check_crt_alignment, theorem2_bound, verify_theorem1,
    verify_theorem2_with, Theorem2Options,
};
use zos::{generate_schedule, ZosError};

#[derive(Parser, Debug)]
#[command(name = "zos", version, about = "ZOS channel-hopping rendezvous toolkit")]
struct Cli {
    /// key=value file supplying defaults for any flag
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print one user's ZOS schedule in the line-oriented text form
    Generate(GenerateArgs),
    /// Simulate one pair of users at a fixed clock offset
    Simulate(SimulateArgs),
    /// Run the bound checks and report pass/fail
    Verify(VerifyArgs),
    /// Monte-Carlo TTR sweep over theta, written as CSV
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Size M of the whole channel set
    #[arg(long)]
    channels: Option<u32>,
    /// Available channels, comma separated (e.g. 1,3,4)
    #[arg(long)]
    available: Option<String>,
    /// Force the stay channel instead of drawing it
    #[arg(long)]
    stay: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    channels: Option<u32>,
    /// User 1's available channels
    #[arg(long)]
    c1: Option<String>,
    /// User 2's available channels
    #[arg(long)]
    c2: Option<String>,
    /// Slots by which user 2's clock leads user 1's
    #[arg(long)]
    offset: Option<u64>,
    #[arg(long)]
    stay1: Option<u32>,
    #[arg(long)]
    stay2: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Defaults to the ZOS bound + 1
    #[arg(long)]
    horizon: Option<u64>,
    /// zos or random-baseline
    #[arg(long)]
    algo: Option<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Largest M for the exhaustive ZOS/ZOS sweep (2..=8)
    #[arg(long)]
    channels: Option<u32>,
    /// Number of rng seeds per exhaustive configuration
    #[arg(long)]
    trials: Option<u64>,
    /// First rng seed
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long)]
    channels: Option<u32>,
    /// Comma separated fractions of M available to each user
    #[arg(long)]
    theta: Option<String>,
    /// Number of channels common to both users (G)
    #[arg(long)]
    common: Option<u32>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    horizon: Option<u64>,
    /// Comma separated: zos, random-baseline
    #[arg(long)]
    algo: Option<String>,
    /// CSV destination; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Verification(String),
    Runtime(String),
}

impl From<ZosError> for Failure {
    fn from(e: ZosError) -> Self {
        match e {
            ZosError::Io(_) | ZosError::Csv(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

/// Merged view over command-line flags and the optional config file.
struct Settings {
    file: HashMap<String, String>,
}

impl Settings {
    fn load(path: Option<&Path>) -> CliResult<Self> {
        let mut file = HashMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            for (n, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| {
                    Failure::Config(format!("{}:{}: expected key=value", path.display(), n + 1))
                })?;
                file.insert(k.trim().trim_start_matches("--").to_string(), v.trim().to_string());
            }
        }
        Ok(Settings { file })
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Failure::Config(format!("config key `{key}`: bad value `{v}`"))),
        }
    }

    fn require<T: FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<T> {
        self.get(flag, key)?
            .ok_or_else(|| Failure::Config(format!("missing --{key}")))
    }
}

fn parse_list<T: FromStr>(raw: &str, what: &str) -> CliResult<Vec<T>> {
    raw.split([',', ' '])
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Failure::Config(format!("bad {what} `{s}`")))
        })
        .collect()
}

fn channel_set(universe: u32, raw: &str) -> CliResult<ChannelSet> {
    Ok(ChannelSet::new(universe, parse_list::<u32>(raw, "channel")?)?)
}

fn write_out(out: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn generate(args: GenerateArgs, cfg: &Settings) -> CliResult<()> {
    let universe = cfg.require(args.channels, "channels")?;
    let available = match cfg.get(args.available, "available")? {
        Some(raw) => channel_set(universe, &raw)?,
        None => ChannelSet::whole(universe)?,
    };
    let seed = cfg.get(args.seed, "seed")?.unwrap_or(0);
    let stay = cfg.get(args.stay, "stay")?.map(ChannelId);
    let schedule = generate_schedule(universe, &available, &mut RngStream::new(seed), stay)?;
    let out: Option<PathBuf> = cfg.get(args.out, "out")?;
    write_out(out.as_deref(), schedule.to_text().as_bytes())
}

fn simulate(args: SimulateArgs, cfg: &Settings) -> CliResult<()> {
    let universe = cfg.require(args.channels, "channels")?;
    let c1 = channel_set(universe, &cfg.require(args.c1, "c1")?)?;
    let c2 = channel_set(universe, &cfg.require(args.c2, "c2")?)?;
    let offset = cfg.get(args.offset, "offset")?.unwrap_or(0);
    let seed = cfg.get(args.seed, "seed")?.unwrap_or(0);
    let algo: Algorithm = match cfg.get::<String>(args.algo, "algo")? {
        Some(raw) => raw.parse()?,
        None => Algorithm::Zos,
    };
    let bound = theorem2_bound(universe, c1.len() as u32, c2.len() as u32);
    let explicit_horizon = cfg.get(args.horizon, "horizon")?;
    let horizon = explicit_horizon.unwrap_or(bound + 1);
    let root = RngStream::new(seed);
    let result = match algo {
        Algorithm::Zos => {
            let s1 = cfg.get(args.stay1, "stay1")?.map(ChannelId);
            let s2 = cfg.get(args.stay2, "stay2")?.map(ChannelId);
            let a = generate_schedule(universe, &c1, &mut root.derive(&[1]), s1)?;
            let b = generate_schedule(universe, &c2, &mut root.derive(&[2]), s2)?;
            println!("stay channels: s1={} s2={}", a.stay_channel(), b.stay_channel());
            simulate_pair(&PairConfig::new(&a, &b, offset, horizon)?)
        }
        Algorithm::RandomBaseline => {
            let a = random_baseline_schedule(universe, &c1, &mut root.derive(&[1]))?;
            let b = random_baseline_schedule(universe, &c2, &mut root.derive(&[2]))?;
            simulate_pair(&PairConfig::new(&a, &b, offset, horizon)?)
        }
    };
    match result {
        RendezvousResult::Met { ttr, channel } => {
            println!("met: ttr={ttr} channel={channel} (bound {bound})");
            Ok(())
        }
        RendezvousResult::Timeout { horizon } => {
            println!("timeout: no rendezvous within {horizon} slots (bound {bound})");
            if algo == Algorithm::Zos && explicit_horizon.is_none() {
                Err(Failure::Verification("ZOS pair exceeded its bound".into()))
            } else {
                Ok(())
            }
        }
    }
}

fn verify(args: VerifyArgs, cfg: &Settings) -> CliResult<()> {
    let max_m = cfg.get(args.channels, "channels")?.unwrap_or(4);
    if !(2..=8).contains(&max_m) {
        return Err(Failure::Config(format!(
            "--channels for verify must be in 2..=8, got {max_m}"
        )));
    }
    let n_seeds = cfg.get(args.trials, "trials")?.unwrap_or(10);
    let base = cfg.get(args.seed, "seed")?.unwrap_or(0);
    let seeds: Vec<u64> = (base..base + n_seeds).collect();
    let mut ok = true;
    let mut line = |name: &str, pass: bool, detail: String| {
        ok &= pass;
        println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    };

    let bertrand = (1..=10_000u32).all(|m| {
        let p = smallest_prime_at_least(m);
        p >= m && p <= 2 * m
    });
    line("prime bound", bertrand, "m <= P(m) <= 2m for m in 1..=10000".into());

    let crt = (1..=30u64)
        .flat_map(|p| (1..=30u64).map(move |q| (p, q)))
        .filter(|&(p, q)| gcd(p, q) == 1)
        .all(|(p, q)| check_crt_alignment(p, q));
    line("crt alignment", crt, "all coprime p, q <= 30".into());

    let windows = (2..=16).all(all_seed_windows_distinct);
    line("seed windows", windows, "M in 2..=16, all s1 != s2".into());

    let t1_seeds: Vec<u64> = (base..base + 25).collect();
    let mut t1_worst = 0.0f64;
    let mut t1_ok = true;
    for m1 in 1..=6 {
        for m2 in 1..=6 {
            let r = verify_theorem1(m1, m2, &t1_seeds, 12);
            if !r.pass() {
                println!("{r}");
            }
            t1_ok &= r.pass();
            t1_worst = t1_worst
                .max(r.forward.worst_observed_ttr as f64 / r.forward.bound as f64)
                .max(r.swapped.worst_observed_ttr as f64 / r.swapped.bound as f64);
        }
    }
    line(
        "1-type vs 0-type",
        t1_ok,
        format!("m1, m2 in 1..=6, 25 seeds, worst TTR/bound {t1_worst:.3}"),
    );

    for universe in 2..=max_m {
        let opts = Theorem2Options {
            exhaustive_sets: true,
            full_period: universe == 2,
            ..Theorem2Options::default()
        };
        let mut all_ok = true;
        let mut jobs = 0;
        let mut worst = 0.0f64;
        for m1 in 1..=universe {
            for m2 in 1..=universe {
                let r = verify_theorem2_with(universe, m1, m2, &seeds, &opts);
                if !r.pass() {
                    println!("{r}");
                }
                all_ok &= r.pass();
                jobs += r.general.trials;
                worst = worst.max(r.general.worst_observed_ttr as f64 / r.general.bound as f64);
            }
        }
        line(
            &format!("ZOS/ZOS M={universe}"),
            all_ok,
            format!(
                "all intersecting set pairs, both stay regimes, {jobs} schedule pairs, worst TTR/bound {worst:.3}"
            ),
        );
    }

    if ok {
        println!("all checks passed");
        Ok(())
    } else {
        Err(Failure::Verification("one or more checks failed".into()))
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn experiment(args: ExperimentArgs, cfg: &Settings) -> CliResult<()> {
    let defaults = ExperimentConfig::default();
    let thetas = match cfg.get(args.theta, "theta")? {
        Some(raw) => parse_list(&raw, "theta")?,
        None => DEFAULT_THETAS.to_vec(),
    };
    let algorithms = match cfg.get::<String>(args.algo, "algo")? {
        Some(raw) => raw
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Algorithm>, _>>()?,
        None => defaults.algorithms.clone(),
    };
    let config = ExperimentConfig {
        channels: cfg.get(args.channels, "channels")?.unwrap_or(defaults.channels),
        thetas,
        common: cfg.get(args.common, "common")?.unwrap_or(defaults.common),
        trials: cfg.get(args.trials, "trials")?.unwrap_or(defaults.trials),
        master_seed: cfg.get(args.seed, "seed")?.unwrap_or(defaults.master_seed),
        algorithms,
        horizon: cfg.get(args.horizon, "horizon")?,
        exec: defaults.exec,
    };
    let stats = run_experiment(&config)?;
    let mut buf = Vec::new();
    emit_csv(&stats, &mut buf)?;
    let out: Option<PathBuf> = cfg.get(args.out, "out")?;
    write_out(out.as_deref(), &buf)?;

    let violations: Vec<_> = stats
        .iter()
        .filter(|s| s.algorithm == Algorithm::Zos && config.horizon.is_none())
        .filter(|s| s.timeouts > 0 || s.max_ttr > s.bound)
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "{} ZOS rows exceeded the bound",
            violations.len()
        )))
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let settings = Settings::load(cli.config.as_deref())?;
    match cli.command {
        Command::Generate(a) => generate(a, &settings),
        Command::Simulate(a) => simulate(a, &settings),
        Command::Verify(a) => verify(a, &settings),
        Command::Experiment(a) => experiment(a, &settings),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(msg)) => {
            eprintln!("invalid configuration: {msg}");
            ExitCode::from(2)
        }
    }
}
