mod commands;
mod input;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Fiber volumes of density operators and their entropy statistics.
#[derive(Parser, Debug)]
#[command(name = "fibervol", version)]
struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Raw and normalized fiber volume.
    Volume(VolumeArgs),
    /// Induced metric and its determinant at one parameter point.
    Metric(MetricArgs),
    /// Entropies, normalized volume and information gain of a state.
    Entropy(EntropyArgs),
    /// Bin the qutrit simplex by a normalized measure.
    CoarseGrain(CoarseArgs),
    /// Volume cutoff and tail entropy along the pure-to-uniform family.
    Scaling(ScalingArgs),
    /// Run the cross-check suites.
    Validate(ValidateArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GroupArg {
    So3,
    Su2,
    Son,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Quadrature,
    MonteCarlo,
    ClosedForm,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Volume,
    Linear,
    VonNeumann,
    All,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    Metric,
    Derivatives,
    PartialTrace,
    Volume,
    So4Proportionality,
}

#[derive(Args, Debug)]
pub struct StateArgs {
    /// Eigenvalues, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub spectrum: Option<String>,
    /// Text file: first line d, then d rows of `re+imj` entries.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OutArgs {
    /// Output file (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct VolumeArgs {
    #[arg(long, value_enum)]
    pub group: GroupArg,
    #[command(flatten)]
    pub state: StateArgs,
    /// Defaults to quadrature up to three angles, Monte Carlo beyond.
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Integrand evaluations (quadrature: 48 per axis; Monte Carlo: 10^6).
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct MetricArgs {
    #[arg(long, value_enum)]
    pub group: GroupArg,
    #[command(flatten)]
    pub state: StateArgs,
    /// Angles, comma separated (default: all zero).
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Group for the normalized volume (default: su2 for d = 2, son otherwise).
    #[arg(long, value_enum)]
    pub group: Option<GroupArg>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct CoarseArgs {
    #[arg(long, default_value_t = 300)]
    pub ell: usize,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, value_enum, default_value = "all")]
    pub measure: MeasureArg,
    /// Count only cells inside the Weyl chamber.
    #[arg(long)]
    pub weyl_only: bool,
    /// Output directory.
    #[arg(long, env = "FIBERVOL_OUT_DIR", default_value = ".")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ScalingArgs {
    #[arg(long, default_value = "3,5,7,11,30")]
    pub n_list: String,
    /// Samples per curve in the volume-curve table.
    #[arg(long, default_value_t = 1001)]
    pub curve_samples: usize,
    /// Output directory.
    #[arg(long, env = "FIBERVOL_OUT_DIR", default_value = ".")]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// Suites to run (default: all but so4-proportionality).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub suite: Vec<SuiteArg>,
    /// Monte Carlo samples per spectrum for so4-proportionality.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const FAILED: u8 = 1;
    pub const BAD_SPECTRUM: u8 = 2;
    pub const MISMATCH: u8 = 3;
    pub const UNWRITABLE: u8 = 4;

    pub fn spectrum(msg: impl Into<String>) -> Self {
        Self {
            code: Self::BAD_SPECTRUM,
            message: msg.into(),
        }
    }

    pub fn mismatch(msg: impl Into<String>) -> Self {
        Self {
            code: Self::MISMATCH,
            message: msg.into(),
        }
    }

    pub fn unwritable(msg: impl Into<String>) -> Self {
        Self {
            code: Self::UNWRITABLE,
            message: msg.into(),
        }
    }
}

impl From<fibervol::Error> for CliError {
    fn from(e: fibervol::Error) -> Self {
        use fibervol::Error as E;
        let code = match e {
            E::NotAProbabilityVector(_)
            | E::NotHermitian(_)
            | E::InvalidTrace(_)
            | E::NotPositive(_)
            | E::NonFinite
            | E::NoConvergence(_) => Self::BAD_SPECTRUM,
            E::DimensionMismatch { .. }
            | E::UnsupportedDimension(_)
            | E::BadParameterCount { .. } => Self::MISMATCH,
            E::Io(_) | E::Csv(_) => Self::UNWRITABLE,
            _ => Self::FAILED,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("fibervol: cannot configure thread pool: {e}");
        }
    }
    let result = match &cli.command {
        Command::Volume(a) => commands::volume(a),
        Command::Metric(a) => commands::metric(a),
        Command::Entropy(a) => commands::entropy(a),
        Command::CoarseGrain(a) => commands::coarse_grain(a),
        Command::Scaling(a) => commands::scaling(a),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fibervol: {e}");
            ExitCode::from(e.code)
        }
    }
}
