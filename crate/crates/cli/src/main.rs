//! `mrpz`: reduce SISO models by moment matching with prescribed poles,
//! zeros and derivative conditions, from a realization or from samples.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mrpz_core::constraints::DEFAULT_TOL;

#[derive(Debug, Parser)]
#[command(name = "mrpz", version, about = "Moment-matching model reduction with pole-zero placement")]
pub struct Cli {
    /// Relative tolerance of the constraint solve. Reports are checked
    /// against 100 times this value.
    #[arg(long, env = "MRPZ_TOL", default_value_t = DEFAULT_TOL, global = true)]
    pub tol: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Md,
    Csv,
}

/// Points and constraints shared by the reduction commands. Lists are
/// comma separated complex literals such as `-1,-2+3j,-2-3j`; a point may
/// carry a multiplicity as `0.5:2`.
#[derive(Debug, Clone, Default, Args)]
pub struct ConstraintArgs {
    /// Interpolation points.
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// Poles to place.
    #[arg(long, allow_hyphen_values = true)]
    pub poles: Option<String>,
    /// Zeros to place.
    #[arg(long, allow_hyphen_values = true)]
    pub zeros: Option<String>,
    /// Interpolation points at which the next moment is matched as well.
    #[arg(long = "deriv-points", allow_hyphen_values = true)]
    pub deriv_points: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Poles, zeros, Hankel singular values and norms of a system.
    Analyze {
        #[arg(long)]
        system: PathBuf,
        #[arg(long, value_enum, default_value = "md")]
        format: Format,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a realization; writes the model and prints a constraint report.
    Reduce {
        #[arg(long)]
        system: PathBuf,
        #[command(flatten)]
        constraints: ConstraintArgs,
        /// Reduced model JSON.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "md")]
        format: Format,
        /// Exit with status 2 when the reduced model has a pole with Re >= 0.
        #[arg(long)]
        require_stable: bool,
        /// Accept fewer conditions than the order and take the minimum-norm solution.
        #[arg(long)]
        least_norm: bool,
    },
    /// Reduce from transfer-function samples alone via Loewner matrices.
    ReduceData {
        /// CSV with columns point_re,point_im,order,value_re,value_im.
        #[arg(long)]
        samples: PathBuf,
        #[command(flatten)]
        constraints: ConstraintArgs,
        /// Reduced model JSON.
        #[arg(long)]
        out: PathBuf,
        /// Loewner pair dump; defaults to the model path with `.loewner.json`.
        #[arg(long)]
        loewner: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "md")]
        format: Format,
        #[arg(long)]
        require_stable: bool,
        /// Fill the pole rows with K(lambda) and negate the derivative rows,
        /// as in the originally published tables. Does not place the poles.
        #[arg(long)]
        paper_sign_compat: bool,
    },
    /// Compare reduction methods on one system.
    Compare {
        #[arg(long)]
        system: PathBuf,
        /// JSON array of method configurations.
        #[arg(long)]
        methods: Option<PathBuf>,
        /// Without --methods: compare moment matching (from the constraint
        /// flags), balanced truncation and IRKA at this order.
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        constraints: ConstraintArgs,
        #[arg(long, value_enum, default_value = "md")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        least_norm: bool,
    },
    /// Write a random stable system, and optionally samples of it.
    Synth {
        #[arg(long)]
        order: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// System JSON.
        #[arg(long)]
        out: PathBuf,
        /// Samples CSV: values at the points and poles, derivatives at the
        /// derivative points.
        #[arg(long)]
        samples: Option<PathBuf>,
        #[command(flatten)]
        constraints: ConstraintArgs,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // Usage errors are hard errors (1); clap's own code 2 means "degraded" here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(commands::Outcome::Success) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Degraded(why)) => {
            eprintln!("warning: {why}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
