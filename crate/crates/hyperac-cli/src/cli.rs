//! Argument parsing and dispatch. Exit codes: 0 success, 1 configuration
//! error, 2 numerical blow-up, 64 usage error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use hyperac::experiments::Overrides;

use crate::commands::{cmd_example, cmd_run, cmd_sweep, cmd_verify};

#[derive(Parser, Debug)]
#[command(
    name = "hyperac",
    version,
    about = "Damped-wave solver for bistable reaction fronts",
    long_about = "Simulates the hyperbolic Allen-Cahn equation \
                  tau*u_tt + g(u)*u_t = eps^2*u_xx + f(u) on an interval with \
                  reflecting walls, via a two-speed kinetic scheme, and \
                  measures how long transition-layer states persist."
)]
struct Cli {
    /// Output root directory (default: $HYPERAC_OUT or ./runs).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Suppress progress output (files are still written).
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct OverrideArgs {
    /// Override the cell count (default: dx ≈ epsilon/5).
    #[arg(long)]
    cells: Option<usize>,
    /// Override the time horizon.
    #[arg(long)]
    horizon: Option<f64>,
    /// Override epsilon (layer width).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Override tau (relaxation time).
    #[arg(long)]
    tau: Option<f64>,
}

impl OverrideArgs {
    fn to_overrides(&self) -> Overrides {
        Overrides {
            cells: self.cells,
            horizon: self.horizon,
            epsilon: self.epsilon,
            tau: self.tau,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one of the four preset experiments (1..=4).
    Example {
        n: u8,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Run an experiment described by a JSON config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Sweep a base config over epsilons, each to horizon m·eps^-k.
    Sweep {
        config: PathBuf,
        /// Comma-separated epsilon values, e.g. 0.2,0.1,0.05.
        #[arg(long, value_delimiter = ',')]
        epsilons: Option<Vec<f64>>,
        /// Horizon exponent k (default: the config's k_exponent).
        #[arg(long)]
        k: Option<f64>,
        /// Horizon prefactor m (default: the config's m).
        #[arg(long)]
        m: Option<f64>,
    },
    /// Run the self-check suite (constants, residuals, certificates).
    Verify,
}

fn output_root(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("HYPERAC_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"))
}

/// Parses and runs; never panics on user input. Suitable for calling from
/// `main` with `std::process::exit`.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    64
                }
            };
        }
    };
    let out_root = output_root(cli.out);
    let quiet = cli.quiet;
    let result = match &cli.command {
        Command::Example { n, overrides } => {
            cmd_example(*n, &overrides.to_overrides(), &out_root, quiet)
        }
        Command::Run { config, overrides } => {
            cmd_run(config, &overrides.to_overrides(), &out_root, quiet)
        }
        Command::Sweep {
            config,
            epsilons,
            k,
            m,
        } => cmd_sweep(config, epsilons.clone(), *k, *m, &out_root, quiet),
        Command::Verify => cmd_verify(&out_root, quiet),
    };
    match result {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
