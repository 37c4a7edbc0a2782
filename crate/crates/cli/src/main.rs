//! `lienard` command-line front end.
//!
//! Exit codes: 0 success, 2 input error, 3 unmet precondition, 4 numerical
//! failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lienard::avg::{DEFAULT_A, DEFAULT_B};
use lienard::Error;

use commands::{AverageArgs, Common, CounterexampleArgs, CyclesArgs, Kind, SimulateArgs};

#[derive(Parser, Debug)]
#[command(name = "lienard", version, about = "Limit cycles of Lienard systems x'' + f(x) x' + g(x) = 0")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for the grid-parallel return map [default: all cores]
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Echoed into every report; all computations are deterministic
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Copy)]
struct Tolerances {
    /// Absolute tolerance of the integrator
    #[arg(long = "tol-abs", default_value_t = 1e-10)]
    tol_abs: f64,

    /// Relative tolerance of the integrator
    #[arg(long = "tol-rel", default_value_t = 1e-10)]
    tol_rel: f64,

    /// Relative tolerance of the equal-potential test G(x1) = G(x2)
    #[arg(long = "tol-D", default_value_t = 1e-9)]
    tol_d: f64,
}

#[derive(Args, Debug)]
struct Io {
    /// JSON report path [default: standard output]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the hypotheses and report the resulting verdict
    Analyze {
        /// System spec (JSON)
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Integrate one trajectory in the Lienard plane
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        io: Io,
        /// Trajectory CSV with columns t, x, y
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        x0: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        y0: f64,
        /// Final time
        #[arg(long = "t-end", default_value_t = 20.0)]
        t_end: f64,
        /// Resample the CSV on a uniform time grid [default: integrator steps]
        #[arg(long)]
        dt: Option<f64>,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Locate limit cycles as fixed points of the return map on y = 0, x > 0
    Cycles {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        io: Io,
        /// Orbit CSV with columns cycle, t, x, y
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Section range LO:HI [default: derived from the zeros of F]
        #[arg(long, value_parser = parse_range)]
        range: Option<(f64, f64)>,
        /// Grid points on the section
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Deform a system into one with a certified unique limit cycle
    Deform {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum)]
        kind: Kind,
        /// Relative margin above the threshold slope (poly kind)
        #[arg(long, default_value_t = 0.1)]
        margin: f64,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Averaged amplitude function and predicted cycle radii for x'' + f(x) x' + x = 0
    Average {
        /// System spec with g(x) = x [default: the three-cycle counterexample]
        #[arg(long)]
        system: Option<PathBuf>,
        #[command(flatten)]
        io: Io,
        /// Damping scale for the built-in counterexample
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_A, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = DEFAULT_B, allow_hyphen_values = true)]
        b: f64,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Write the three-cycle counterexample spec, optionally searching its cycles
    Counterexample {
        /// Destination of the system spec [default: standard output]
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        /// Coefficient of x in the damping
        #[arg(long, default_value_t = DEFAULT_A, allow_hyphen_values = true)]
        a: f64,
        /// Coefficient of x^3 in the damping
        #[arg(long, default_value_t = DEFAULT_B, allow_hyphen_values = true)]
        b: f64,
        /// Run the cycle search on the written spec
        #[arg(long)]
        cycles: bool,
        /// Cycle report path [default: standard output]
        #[arg(long)]
        report: Option<PathBuf>,
        /// Orbit CSV of the detected cycles
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, value_parser = parse_range)]
        range: Option<(f64, f64)>,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[command(flatten)]
        tol: Tolerances,
    },
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("bad lower bound `{lo}`: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("bad upper bound `{hi}`: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("range must satisfy LO < HI, got {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Precondition { .. }) => 3,
        Some(e) if e.is_numerical() => 4,
        Some(Error::Degenerate(_)) => 4,
        _ => 2,
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(Error::InvalidArgument("--jobs must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let common = |tol: Tolerances| Common {
        tol_abs: tol.tol_abs,
        tol_rel: tol.tol_rel,
        tol_d: tol.tol_d,
        seed: cli.seed,
    };
    let tol = match &cli.command {
        Command::Analyze { tol, .. }
        | Command::Simulate { tol, .. }
        | Command::Cycles { tol, .. }
        | Command::Deform { tol, .. }
        | Command::Average { tol, .. }
        | Command::Counterexample { tol, .. } => *tol,
    };
    let common = common(tol);
    common.validate()?;

    match &cli.command {
        Command::Analyze { system, io, .. } => {
            commands::analyze(&common, system, io.out.as_deref())?;
        }
        Command::Simulate {
            system,
            io,
            csv,
            x0,
            y0,
            t_end,
            dt,
            ..
        } => {
            let args = SimulateArgs {
                x0: *x0,
                y0: *y0,
                t_end: *t_end,
                dt: *dt,
            };
            commands::simulate(&common, system, &args, io.out.as_deref(), csv.as_deref())?;
        }
        Command::Cycles {
            system,
            io,
            csv,
            range,
            grid,
            ..
        } => {
            let args = CyclesArgs {
                range: *range,
                grid: *grid,
            };
            commands::cycles(&common, system, &args, io.out.as_deref(), csv.as_deref())?;
        }
        Command::Deform {
            system, io, kind, margin, ..
        } => {
            commands::deform(&common, system, *kind, *margin, io.out.as_deref())?;
        }
        Command::Average { system, io, eps, a, b, .. } => {
            let args = AverageArgs { eps: *eps, a: *a, b: *b };
            commands::average(&common, system.as_deref(), &args, io.out.as_deref())?;
        }
        Command::Counterexample {
            out,
            eps,
            a,
            b,
            cycles,
            report,
            csv,
            range,
            grid,
            ..
        } => {
            let args = CounterexampleArgs {
                eps: *eps,
                a: *a,
                b: *b,
                chain: *cycles,
                report: report.clone(),
                cycles: CyclesArgs {
                    range: *range,
                    grid: *grid,
                },
            };
            commands::counterexample(&common, &args, out.as_deref(), csv.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
