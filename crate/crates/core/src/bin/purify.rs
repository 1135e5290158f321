//! Command-line front end: reproduces the rate table and comparison curves and
//! exposes the individual rate, policy, simulation and channel computations.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::ToPrimitive;

use purify::channel::{q2_lower_bound, Q2_MAX_BLOCK};
use purify::montecarlo::estimate_rate;
use purify::numerics::exact::{parse_rational, EXACT_MAX_BLOCK};
use purify::report::{self, ReeSource, SourceSpec};
use purify::{
    check_block_size, Error, RateTable, SourceState, Strategy, DEFAULT_MAX_BLOCK, MAX_BLOCK,
};

#[derive(Parser, Debug)]
#[command(
    name = "purify",
    version,
    about = "Distillation rates of the bisection + hashing protocol"
)]
struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rates with and without hashing for n = 2, 4, ..., max-n (CSV).
    Table1 {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 64)]
        max_n: usize,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Comparison curves over an open grid of p (CSV).
    Figure1 {
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Number of interior grid points.
        #[arg(long = "grid", default_value_t = 19)]
        grid_points: usize,
    },
    /// Protocol rate in ebits per pair.
    Rate {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        n: usize,
        /// Disable the hashing branch (bisection only).
        #[arg(long)]
        no_hashing: bool,
        #[command(flatten)]
        backend: BackendArgs,
    },
    /// Decisions at every state reachable from the first measurement.
    Policy {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        n: usize,
    },
    /// Monte Carlo estimate of the protocol rate.
    Simulate {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Two-way capacity lower bound of the amplitude damping channel.
    Q2 {
        /// Damping amplitude; the decay probability is gamma^2.
        #[arg(long, value_parser = parse_unit)]
        gamma: UnitValue,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Weight of the entangled component, decimal or fraction such as 2/3.
    #[arg(long, value_parser = parse_unit)]
    p: UnitValue,
    /// Schmidt weight |alpha|^2 of the entangled component.
    #[arg(long, value_parser = parse_unit, default_value = "1/2")]
    alpha2: UnitValue,
}

#[derive(Args, Debug)]
struct BackendArgs {
    /// Compute outcome probabilities with exact rationals (n <= 16).
    #[arg(long)]
    exact: bool,
    /// Allow first-measurement blocks above 128 pairs.
    #[arg(long)]
    allow_large_n: bool,
}

/// A number in [0, 1] kept both as f64 and as the exact rational it was
/// written as.
#[derive(Clone, Debug)]
struct UnitValue {
    value: f64,
    exact: BigRational,
}

fn parse_unit(s: &str) -> Result<UnitValue, String> {
    let exact = parse_rational(s).map_err(|e| e.to_string())?;
    let value = exact
        .to_f64()
        .ok_or_else(|| format!("{s:?} is not representable"))?;
    if !(0.0..=1.0).contains(&value) {
        return Err(format!("{s} is outside [0, 1]"));
    }
    Ok(UnitValue { value, exact })
}

impl SourceArgs {
    fn spec(&self, exact: bool) -> Result<SourceSpec, Error> {
        let source = SourceState::new(self.p.value, self.alpha2.value)?;
        let exact = exact.then(|| (self.p.exact.clone(), self.alpha2.exact.clone()));
        Ok(SourceSpec { source, exact })
    }
}

impl BackendArgs {
    fn limit(&self) -> usize {
        if self.allow_large_n {
            MAX_BLOCK
        } else {
            DEFAULT_MAX_BLOCK
        }
    }

    fn check(&self, n: usize) -> Result<(), Error> {
        check_block_size(n, self.limit())?;
        if self.exact && n > EXACT_MAX_BLOCK {
            return Err(Error::Domain(format!(
                "--exact supports n <= {EXACT_MAX_BLOCK}"
            )));
        }
        Ok(())
    }
}

fn run(cli: &Cli) -> Result<String, Error> {
    match &cli.command {
        Command::Table1 {
            source,
            max_n,
            backend,
        } => {
            backend.check(*max_n)?;
            let rows = report::table1_rows(&source.spec(backend.exact)?, *max_n, backend.limit())?;
            Ok(report::render_table1(&rows))
        }
        Command::Figure1 { n, grid_points } => {
            check_block_size(*n, DEFAULT_MAX_BLOCK)?;
            let validation = report::validate_ree()?;
            if validation.source == ReeSource::Oracle {
                eprintln!(
                    "warning: closed-form REE disagrees with the oracle; using oracle values"
                );
                for (p, closed, oracle) in &validation.checks {
                    eprintln!("  p={p:.6} closed={closed:.8} oracle={oracle:.8}");
                }
            }
            let rows = report::figure1_rows(*n, *grid_points, validation.source)?;
            Ok(report::render_figure1(&rows))
        }
        Command::Rate {
            source,
            n,
            no_hashing,
            backend,
        } => {
            backend.check(*n)?;
            let spec = source.spec(backend.exact)?;
            let table = RateTable::build(*n, Strategy::from_no_hashing(*no_hashing))?;
            let rate = match &spec.exact {
                Some((p, alpha2)) => table.expected_rate_exact_at(p, alpha2, *n)?,
                None => table.expected_rate(&spec.source),
            };
            Ok(format!("{}\n", report::fmt6(rate)))
        }
        Command::Policy { source, n } => {
            check_block_size(*n, DEFAULT_MAX_BLOCK)?;
            let spec = source.spec(false)?;
            let table = RateTable::build(*n, Strategy::HashingAndBisection)?;
            Ok(report::render_policy(&table.extract_policy(&spec.source)))
        }
        Command::Simulate {
            source,
            n,
            trials,
            seed,
        } => {
            check_block_size(*n, DEFAULT_MAX_BLOCK)?;
            let spec = source.spec(false)?;
            let estimate = estimate_rate(&spec.source, *n, *trials, *seed)?;
            Ok(report::render_estimate(&estimate))
        }
        Command::Q2 { gamma, n } => {
            check_block_size(*n, Q2_MAX_BLOCK)?;
            let point = q2_lower_bound(gamma.value, *n)?;
            Ok(report::render_channel_point(&point, *n))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Domain(_) | Error::BlockSize(..) => 2,
        Error::PolicyMismatch(_) | Error::Numeric(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let output = match run(&cli) {
        Ok(output) => output,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, output.as_bytes()),
        None => std::io::stdout().write_all(output.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
