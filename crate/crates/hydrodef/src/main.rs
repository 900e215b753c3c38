use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hydrodef::commands::{self, CheckKind, CliError, Options};
use hydrodef::Report;
use hydrodef_core::Caps;

#[derive(Parser)]
#[command(name = "hydrodef", version, about = "Exact checks for degenerate hydrodynamic Poisson brackets and their deformations")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    /// Accept Gaussian rational coefficients (the letter `i`).
    #[arg(long, global = true)]
    complex: bool,
    /// Highest δ-derivative order the engine may produce.
    #[arg(long, env = "HYDRODEF_MAX_DELTA", global = true)]
    max_delta: Option<u8>,
    /// Highest jet order the engine may produce.
    #[arg(long, env = "HYDRODEF_MAX_JET", global = true)]
    max_jet: Option<u8>,
    /// First seed of the random-evaluation oracle.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Report elapsed_ms as 0 so that output is byte-stable.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Tensor conditions, Jacobi identity or skew-symmetry of a problem file.
    Check { kind: CheckKind, file: PathBuf },
    /// Schouten bracket of two bivectors.
    Bracket { p: PathBuf, q: PathBuf },
    /// Lie derivative of an operator along a vector field.
    Lie { field: PathBuf, op: PathBuf },
    /// Change of dependent variables applied to a hydrodynamic operator.
    Transform { map: PathBuf, op: PathBuf },
    /// Built-in canonical forms and deformation families.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Unknown coefficients of the general homogeneous deformations.
    Count {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        degree: u8,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    List,
    Verify {
        /// Entry or driver name; every case when omitted.
        #[arg(long)]
        case: Option<String>,
    },
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let mut caps = Caps::default();
    if let Some(d) = cli.max_delta {
        caps.max_delta = d;
    }
    if let Some(j) = cli.max_jet {
        caps.max_jet = j;
    }
    let opts = Options { caps, seed: cli.seed, complex: cli.complex };
    match &cli.command {
        Command::Check { kind, file } => commands::check(*kind, file, &opts),
        Command::Bracket { p, q } => commands::bracket(p, q, &opts),
        Command::Lie { field, op } => commands::lie_derivative(field, op, &opts),
        Command::Transform { map, op } => commands::transform(map, op, &opts),
        Command::Catalog { action: CatalogAction::List } => commands::catalog_list(&opts),
        Command::Catalog { action: CatalogAction::Verify { case } } => commands::catalog_verify(case.as_deref(), &opts),
        Command::Count { n, degree } => commands::count(*n, *degree, &opts),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(mut report) => {
            if cli.no_timing {
                report.elapsed_ms = 0;
            }
            let text = match cli.format {
                Format::Json => report.to_json() + "\n",
                Format::Text => report.to_text(),
            };
            // A closed pipe (`| head`) is not an error worth reporting.
            let _ = std::io::stdout().write_all(text.as_bytes());
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(2)
        }
    }
}
