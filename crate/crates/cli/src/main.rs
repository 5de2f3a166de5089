//! `cbop`: bimoments, biorthogonal polynomials, recurrences, zeros,
//! invariant suites and Riemann–Hilbert matrices for a measure pair given as
//! JSON.

mod commands;
mod output;
mod spec;

use std::io::Read;
use std::process::ExitCode;

use cbop::bop::Side;
use cbop::measure::Measure;
use cbop::verify::{Mode, Options, Suite, DEFAULT_EPS};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use commands::{bimoments, bop, on_pair, recurrence, rhp, zeros, Pair, WhichArg};
use output::Format;
use spec::MeasureSpec;

#[derive(Parser)]
#[command(name = "cbop", version, about = "Cauchy biorthogonal polynomials for a pair of measures on the half-line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Measure pair document, or "-" for stdin.
    #[arg(default_value = "-")]
    spec: String,
    /// exact (discrete rational measures only) or float; defaults to exact
    /// when both measures are discrete.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_enum, default_value = "json")]
    output: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    P,
    Q,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Tp,
    Recurrence,
    Cdi,
    Pade,
    Duality,
    Rhp,
}

#[derive(Subcommand)]
enum Command {
    /// Bimoment matrix, leading minors, total positivity and the rank-one shift.
    Bimoments {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'N', long, default_value_t = 4)]
        order: usize,
        /// Largest consecutive minor checked; defaults to the order.
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Runs an invariant suite and reports every check.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'N', long, default_value_t = 4)]
        order: usize,
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 4)]
        kmax: usize,
        /// Offsets from the cut for the jump study on densities.
        #[arg(long, value_delimiter = ',')]
        eps: Vec<f64>,
    },
    /// Zeros of p̃_n or q̃_n with positivity and interlacing.
    Zeros {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'n', long)]
        degree: usize,
        /// Defaults to degree + 1.
        #[arg(short = 'N', long)]
        order: Option<usize>,
        #[arg(long, value_enum, default_value = "p")]
        side: SideArg,
    },
    /// Monic coefficients of p̃_n and q̃_n, lowest power first.
    Bop {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'n', long)]
        degree: usize,
        #[arg(short = 'N', long)]
        order: Option<usize>,
        /// Also evaluate both polynomials here.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
    },
    /// Multiplication operators and their band factors.
    Recurrence {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'N', long, default_value_t = 4)]
        order: usize,
    },
    /// Entries and determinant of Γ or Γ̂ at a point.
    Rhp {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'n', long)]
        degree: usize,
        #[arg(short = 'N', long)]
        order: Option<usize>,
        #[arg(long, default_value = "10", allow_hyphen_values = true)]
        point: String,
        #[arg(long, value_enum, default_value = "gamma")]
        which: WhichArg,
    },
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(cbop::Error),
    Io(std::io::Error),
}

impl From<cbop::Error> for Failure {
    fn from(e: cbop::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        use cbop::Error::*;
        match self {
            Failure::Usage(_) | Failure::Io(_) => 2,
            Failure::Core(Degenerate { .. } | TheoryViolation(_) | IrrationalNormalization { .. }) => 3,
            Failure::Core(Eigen(_)) => 1,
            Failure::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    CheckFailure,
    TheoryViolation,
}

pub struct Outcome {
    pub value: Value,
    pub status: Status,
}

pub fn warn(msg: &str) {
    eprintln!("cbop: warning: {msg}");
}

fn read_spec(path: &str) -> Result<(Measure, Measure), Failure> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {path}: {e}")))?
    };
    MeasureSpec::parse(&text)?.measures()
}

fn mode_of(arg: Option<ModeArg>, a: &Measure, b: &Measure) -> Mode {
    match arg {
        Some(ModeArg::Exact) => Mode::Exact,
        Some(ModeArg::Float) => Mode::Float,
        None if a.is_discrete() && b.is_discrete() => Mode::Exact,
        None => Mode::Float,
    }
}

fn clip_kmax(kmax: usize, order: usize) -> usize {
    if kmax > order {
        warn(&format!("kmax {kmax} exceeds the order {order}; clipped to {order}"));
        order
    } else {
        kmax
    }
}

fn suite_of(s: SuiteArg) -> Suite {
    match s {
        SuiteArg::All => Suite::All,
        SuiteArg::Tp => Suite::Tp,
        SuiteArg::Recurrence => Suite::Recurrence,
        SuiteArg::Cdi => Suite::Cdi,
        SuiteArg::Pade => Suite::Pade,
        SuiteArg::Duality => Suite::Duality,
        SuiteArg::Rhp => Suite::Rhp,
    }
}

fn side_of(s: SideArg) -> Side {
    match s {
        SideArg::P => Side::P,
        SideArg::Q => Side::Q,
    }
}

fn run(cli: Cli) -> Result<(Outcome, Format), Failure> {
    let load = |c: &Common| -> Result<(Measure, Measure, Mode), Failure> {
        let (a, b) = read_spec(&c.spec)?;
        let mode = mode_of(c.mode, &a, &b);
        Ok((a, b, mode))
    };
    let pair = |c: &Common| -> Result<Pair, Failure> {
        let (a, b, mode) = load(c)?;
        Pair::new(&a, &b, mode)
    };
    let positive = |order: usize| {
        if order == 0 {
            Err(Failure::Usage("the order must be at least 1".into()))
        } else {
            Ok(order)
        }
    };
    let outcome = match &cli.command {
        Command::Bimoments { common, order, kmax } => {
            let order = positive(*order)?;
            let kmax = clip_kmax(kmax.unwrap_or(order), order);
            (on_pair!(&pair(common)?, bimoments(order, kmax))?, common.output)
        }
        Command::Verify { common, order, suite, kmax, eps } => {
            let order = positive(*order)?;
            let (a, b, mode) = load(common)?;
            let opts = Options { kmax: clip_kmax(*kmax, order), eps: if eps.is_empty() { DEFAULT_EPS.to_vec() } else { eps.clone() } };
            if opts.eps.iter().any(|e| !(*e > 0.0)) {
                return Err(Failure::Usage("--eps values must be positive".into()));
            }
            if mode == Mode::Exact && !(a.is_discrete() && b.is_discrete()) {
                return Err(Failure::Usage("exact mode requires discrete measures; use --mode float".into()));
            }
            (commands::verify(&a, &b, order, suite_of(*suite), mode, &opts)?, common.output)
        }
        Command::Zeros { common, degree, order, side } => {
            let order = positive(order.unwrap_or(degree + 1))?;
            (on_pair!(&pair(common)?, zeros(order, *degree, side_of(*side)))?, common.output)
        }
        Command::Bop { common, degree, order, point } => {
            let order = positive(order.unwrap_or(degree + 1))?;
            (on_pair!(&pair(common)?, bop(order, *degree, point.as_deref()))?, common.output)
        }
        Command::Recurrence { common, order } => {
            let order = positive(*order)?;
            (on_pair!(&pair(common)?, recurrence(order))?, common.output)
        }
        Command::Rhp { common, degree, order, point, which } => {
            let order = positive(order.unwrap_or(degree + 1))?;
            (on_pair!(&pair(common)?, rhp(order, *degree, point, *which))?, common.output)
        }
    };
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok((outcome, format)) => {
            if let Err(e) = output::emit(&outcome.value, format) {
                eprintln!("cbop: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(match outcome.status {
                Status::Pass => 0,
                Status::CheckFailure => 1,
                Status::TheoryViolation => 3,
            })
        }
        Err(f) => {
            eprintln!("cbop: error: {f}");
            ExitCode::from(f.code())
        }
    }
}
