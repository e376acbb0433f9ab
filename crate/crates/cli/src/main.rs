use std::path::PathBuf;
use std::process::ExitCode;

use buchstab::omega::QuadratureConfig;
use buchstab::output::OutputFormat;
use buchstab::Error;
use clap::{Args, Parser, Subcommand};

mod commands;

#[derive(Parser, Debug)]
#[command(
    name = "buchstab",
    version,
    about = "Smallest-component statistics and Buchstab functions"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Working precision in decimal digits.
    #[arg(long, global = true, default_value_t = 30)]
    pub precision: u32,

    /// Highest Taylor index kept per unit interval.
    #[arg(long, global = true, default_value_t = 40)]
    pub taylor_degree: u32,

    /// Trapezoid step is 2^-grid_log2.
    #[arg(long, global = true, default_value_t = 12)]
    pub grid_log2: u32,

    /// Number of unit intervals kept before the analytic tail.
    #[arg(long, global = true, default_value_t = 200)]
    pub max_interval: u32,

    /// Class parameter for the generalized function; repeatable.
    #[arg(long = "k", global = true, value_name = "K")]
    pub k: Vec<String>,

    #[arg(long, global = true, default_value = "csv", value_parser = parse_format)]
    pub format: OutputFormat,

    /// Write the table here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Reuse and store computed tables and ledgers in this directory.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,

    /// Significant digits for real-valued columns.
    #[arg(long, global = true, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=200))]
    pub digits: u32,
}

fn parse_format(text: &str) -> Result<OutputFormat, String> {
    text.parse().map_err(|e: Error| e.to_string())
}

impl GlobalArgs {
    pub fn quadrature(&self) -> Result<QuadratureConfig, Error> {
        Ok(QuadratureConfig {
            grid_log2: self.grid_log2,
            max_interval: self.max_interval,
            taylor_degree: self.taylor_degree,
            precision: buchstab::numeric::PrecisionConfig::new(self.precision)?,
            target_digits: QuadratureConfig::default().target_digits,
        })
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Triangular table of counts by smallest component size.
    Counts {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "permutations")]
        class: String,
    },
    /// Exact distribution of the smallest cycle length of a random permutation.
    Dist {
        #[arg(long)]
        n: u32,
    },
    /// P{X_n >= k} with the asymptotic estimate ω(n/k)/k.
    Tail {
        #[arg(long)]
        n: u32,
        /// Component size k; repeatable.
        #[arg(long = "size", required = true)]
        sizes: Vec<u32>,
    },
    /// Var(X_m) and Var(X_m)/m for m = 1..=N.
    VarianceSeries {
        #[arg(long)]
        n: u32,
    },
    /// Evaluate ω at one or more points.
    Omega {
        #[arg(long = "x", required = true)]
        xs: Vec<String>,
    },
    /// moment · ∫_1^∞ ω(t)/t^moment dt with its error budget.
    Constant {
        #[arg(long, default_value_t = 2)]
        moment: u32,
    },
    /// Evaluate Ω_K and 1/Ω_K at one or more points.
    OmegaK {
        #[arg(long = "x", required = true)]
        xs: Vec<String>,
    },
    /// Ω_K on a grid of points, one column per K (defaults: K = 1 and 1/2
    /// on {1..10} ∪ {16, 32, ..., 8192}).
    OmegaKTable {
        #[arg(long = "x")]
        xs: Vec<String>,
    },
    /// Inspect or empty the artifact cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Subcommand, Debug)]
enum CacheAction {
    List,
    Clear,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::ResourceCap { .. } | Error::BudgetExceeded(_) => 3,
        Error::VersionMismatch { .. }
        | Error::CorruptPayload(_)
        | Error::Io(_)
        | Error::Json(_) => 4,
        Error::Domain(_)
        | Error::PrecisionExceedsLiteral { .. }
        | Error::InvalidArgument(_)
        | Error::OutOfRange { .. } => 2,
    }
}

fn execute(cli: &Cli) -> Result<buchstab::output::OutputTable, Error> {
    let g = &cli.global;
    match &cli.command {
        Command::Counts { n, class } => commands::counts(g, *n, class),
        Command::Dist { n } => commands::dist(g, *n),
        Command::Tail { n, sizes } => commands::tail(g, *n, sizes),
        Command::VarianceSeries { n } => commands::variance_series(g, *n),
        Command::Omega { xs } => commands::omega(g, xs),
        Command::Constant { moment } => commands::constant(g, *moment),
        Command::OmegaK { xs } => commands::omega_k(g, xs),
        Command::OmegaKTable { xs } => commands::omega_k_table(g, xs),
        Command::Cache {
            action: CacheAction::List,
        } => commands::cache_list(g),
        Command::Cache {
            action: CacheAction::Clear,
        } => commands::cache_clear(g),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli).and_then(|table| commands::emit(&cli.global, &table)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
