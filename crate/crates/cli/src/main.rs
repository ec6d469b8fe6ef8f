//! `secretary`: command-line front end for the stopping-rule analysis.
//!
//! Exit codes: 0 on success, 1 when a verification finds a discrepancy or
//! output cannot be written, 2 on invalid flags or parameters.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use secretary_core::format::{decimal, exact_and_decimal};
use secretary_core::optimizer::{c1, estimate_cd_table, optimize_rank_with, optimize_reward_with, SearchConfig};
use secretary_core::oracle::DEFAULT_CAP;
use secretary_core::{
    expected_rank, expected_reward, simulate, solve_c2, Error, FloatEvaluator, Oracle, RewardHorizon, RuleParams,
    SimConfig,
};

#[derive(Parser)]
#[command(
    name = "secretary",
    version,
    about = "Exact and empirical analysis of the secretary stopping rule R_n(k, l)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expected rank, and expected reward when -d is given.
    Eval(EvalArgs),
    /// Search (k, l) for the best expected rank or reward; prints JSON.
    Optimize(OptimizeArgs),
    /// Check every formula against exhaustive enumeration up to --n-max.
    Oracle(OracleArgs),
    /// Exhaustive outcome counts for one (n, k, l); prints JSON.
    Enumerate(EnumerateArgs),
    /// Seeded Monte Carlo estimate; prints JSON.
    Simulate(SimulateArgs),
    /// Evaluate along one axis of the grid; writes CSV.
    Sweep(SweepArgs),
    /// Finite-n estimates of c_d alongside c1 and c2.
    Constants(ConstantsArgs),
}

#[derive(Args)]
struct Rule {
    /// Pool size.
    #[arg(short = 'n')]
    n: usize,
    /// Number of candidates rejected outright.
    #[arg(short = 'k')]
    k: usize,
    /// Threshold index among the rejected candidates.
    #[arg(short = 'l')]
    l: usize,
}

impl Rule {
    fn params(&self) -> anyhow::Result<RuleParams> {
        Ok(RuleParams::new(self.n, self.k, self.l)?)
    }
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    rule: Rule,
    /// Reward horizon.
    #[arg(short = 'd')]
    d: Option<usize>,
    /// Exact rational evaluation (default).
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    /// Floating-point evaluation.
    #[arg(long)]
    float: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Rank,
    Reward,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(short = 'n')]
    n: usize,
    #[arg(long, value_enum, default_value = "rank")]
    objective: ObjectiveArg,
    /// Reward horizon; required with --objective reward.
    #[arg(short = 'd')]
    d: Option<usize>,
    /// Largest l searched (default ⌈4 ln n⌉).
    #[arg(long)]
    l_max: Option<usize>,
    /// Use the floating-point path even for small n.
    #[arg(long)]
    float: bool,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    n_max: usize,
    /// Largest n the enumerator accepts.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
}

#[derive(Args)]
struct EnumerateArgs {
    #[command(flatten)]
    rule: Rule,
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    rule: Rule,
    #[arg(short = 'd')]
    d: Option<usize>,
    /// Number of sampled permutations.
    #[arg(long, short = 'M')]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axis {
    K,
    L,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(short = 'n')]
    n: usize,
    /// Evaluate expected reward with this horizon instead of expected rank.
    #[arg(short = 'd')]
    d: Option<usize>,
    /// Axis to vary; the other parameter is held fixed.
    #[arg(long, value_enum)]
    vary: Axis,
    /// Fixed k when varying l.
    #[arg(long)]
    k: Option<usize>,
    /// Fixed l when varying k.
    #[arg(long)]
    l: Option<usize>,
    /// First value of the varied axis (default: smallest valid).
    #[arg(long)]
    from: Option<usize>,
    /// Last value of the varied axis (default: largest valid).
    #[arg(long)]
    to: Option<usize>,
    /// Write exact fractions p/q instead of floats.
    #[arg(long)]
    exact: bool,
    /// Output file (default: standard output).
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long)]
    d_max: usize,
    #[arg(short = 'n', long = "n")]
    n: usize,
    #[arg(long)]
    l_max: Option<usize>,
}

/// Invalid input. Maps to exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

fn horizon(d: Option<usize>, n: usize) -> anyhow::Result<Option<RewardHorizon>> {
    d.map(|d| RewardHorizon::new(d, n)).transpose().map_err(Into::into)
}

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn eval(args: &EvalArgs) -> anyhow::Result<ExitCode> {
    let params = args.rule.params()?;
    let h = horizon(args.d, params.n())?;
    if args.float {
        let eval = FloatEvaluator::new(params.n());
        println!("expected rank: {}", decimal(eval.expected_rank(&params)));
        if let Some(h) = h {
            println!(
                "expected reward (d = {}): {}",
                h.d(),
                decimal(eval.expected_reward(&params, h))
            );
        }
    } else {
        println!("expected rank: {}", exact_and_decimal(&expected_rank(&params)));
        if let Some(h) = h {
            println!(
                "expected reward (d = {}): {}",
                h.d(),
                exact_and_decimal(&expected_reward(&params, h))
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn optimize(args: &OptimizeArgs) -> anyhow::Result<ExitCode> {
    let config = if args.float {
        SearchConfig::float(args.l_max)
    } else {
        SearchConfig::with_l_max(args.l_max)
    };
    let result = match (args.objective, args.d) {
        (ObjectiveArg::Rank, None) => optimize_rank_with(args.n, &config)?,
        (ObjectiveArg::Rank, Some(_)) => return Err(usage("-d applies only to --objective reward")),
        (ObjectiveArg::Reward, Some(d)) => {
            if args.n < 2 {
                return Err(Error::PoolTooSmall { n: args.n }.into());
            }
            let h = RewardHorizon::new(d, args.n)?;
            optimize_reward_with(args.n, h, &config)?
        }
        (ObjectiveArg::Reward, None) => return Err(usage("--objective reward requires -d")),
    };
    print_json(&result)?;
    Ok(ExitCode::SUCCESS)
}

fn oracle(args: &OracleArgs) -> anyhow::Result<ExitCode> {
    let found = Oracle::with_cap(args.cap).verify_formulas(args.n_max)?;
    if found.is_empty() {
        println!("verified");
        return Ok(ExitCode::SUCCESS);
    }
    for d in &found {
        println!("{d}");
    }
    eprintln!("{} discrepancies", found.len());
    Ok(ExitCode::from(1))
}

fn enumerate(args: &EnumerateArgs) -> anyhow::Result<ExitCode> {
    let report = Oracle::with_cap(args.cap).enumerate(&args.rule.params()?)?;
    print_json(&report)?;
    Ok(ExitCode::SUCCESS)
}

fn run_simulation(args: &SimulateArgs) -> anyhow::Result<ExitCode> {
    let params = args.rule.params()?;
    let h = horizon(args.d, params.n())?;
    let result = simulate(&SimConfig::new(params, h, args.samples, args.seed)?)?;
    print_json(&result)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SweepRow {
    n: usize,
    k: usize,
    l: usize,
    d: Option<usize>,
    value: String,
}

fn sweep_points(args: &SweepArgs) -> anyhow::Result<Vec<RuleParams>> {
    let n = args.n;
    if n < 2 {
        return Err(Error::PoolTooSmall { n }.into());
    }
    let (lo, hi) = match args.vary {
        Axis::K => {
            let Some(l) = args.l else {
                return Err(usage("--vary k requires --l"));
            };
            if args.k.is_some() {
                return Err(usage("--k conflicts with --vary k"));
            }
            (l.max(1), n - 1)
        }
        Axis::L => {
            let Some(k) = args.k else {
                return Err(usage("--vary l requires --k"));
            };
            if args.l.is_some() {
                return Err(usage("--l conflicts with --vary l"));
            }
            (1, k)
        }
    };
    let from = args.from.unwrap_or(lo);
    let to = args.to.unwrap_or(hi);
    if from > to {
        return Err(usage(format!("empty range: --from {from} > --to {to}")));
    }
    (from..=to)
        .map(|x| {
            let (k, l) = match args.vary {
                Axis::K => (x, args.l.unwrap()),
                Axis::L => (args.k.unwrap(), x),
            };
            Ok(RuleParams::new(n, k, l)?)
        })
        .collect()
}

fn sweep(args: &SweepArgs) -> anyhow::Result<ExitCode> {
    let points = sweep_points(args)?;
    let h = horizon(args.d, args.n)?;
    let eval = (!args.exact).then(|| FloatEvaluator::new(args.n));

    let sink: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = csv::Writer::from_writer(sink);
    for params in points {
        let value = match (&eval, h) {
            (Some(eval), None) => eval.expected_rank(&params).to_string(),
            (Some(eval), Some(h)) => eval.expected_reward(&params, h).to_string(),
            (None, None) => expected_rank(&params).to_string(),
            (None, Some(h)) => expected_reward(&params, h).to_string(),
        };
        out.serialize(SweepRow {
            n: params.n(),
            k: params.k(),
            l: params.l(),
            d: args.d,
            value,
        })?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn constants(args: &ConstantsArgs) -> anyhow::Result<ExitCode> {
    if args.d_max == 0 {
        return Err(usage("--d-max must be at least 1"));
    }
    let table = estimate_cd_table(args.n, args.d_max, args.l_max)?;
    let c2 = solve_c2();
    println!("c1 = 1/e = {}", decimal(c1()));
    println!(
        "c2 = x(2 - x) = {}  (x = {}, 2x - 2 ln x = 3)",
        decimal(c2.c2),
        decimal(c2.x)
    );
    println!();
    println!("n = {}", args.n);
    println!("{:>4} {:>8} {:>4} {:>14}", "d", "k*", "l*", "c_d");
    for row in table {
        println!("{:>4} {:>8} {:>4} {:>14.6}", row.d, row.k_star, row.l_star, row.c_d);
    }
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Eval(args) => eval(args),
        Command::Optimize(args) => optimize(args),
        Command::Oracle(args) => oracle(args),
        Command::Enumerate(args) => enumerate(args),
        Command::Simulate(args) => run_simulation(args),
        Command::Sweep(args) => sweep(args),
        Command::Constants(args) => constants(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Error>() || e.is::<Usage>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
