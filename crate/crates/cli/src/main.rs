mod commands;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Format, Kind};
use exit::CliError;
use rfbroker_core::DEFAULT_WEIGHT_TOLERANCE;
use rfbroker_service::BrokerConfig;

/// Render-farm service broker.
#[derive(Debug, Parser)]
#[command(name = "rfbroker", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank the providers of a catalog against a selection request.
    Rank {
        #[arg(long)]
        catalog: PathBuf,
        #[arg(long)]
        request: PathBuf,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// What to print on stdout.
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        /// Accepted deviation of the weight sum from 1.
        #[arg(long, default_value_t = DEFAULT_WEIGHT_TOLERANCE)]
        tolerance: f64,
    },
    /// Check a catalog or request file. Exits 0 when valid, 2 otherwise.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        kind: Kind,
        #[arg(long, default_value_t = DEFAULT_WEIGHT_TOLERANCE)]
        tolerance: f64,
    },
    /// Convert a raw catalog into a normalized one.
    Normalize {
        #[arg(long)]
        catalog: PathBuf,
        /// Output file; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Rank {
            catalog,
            request,
            out,
            format,
            tolerance,
        } => commands::rank(&catalog, &request, out.as_deref(), format, tolerance),
        Command::Validate {
            file,
            kind,
            tolerance,
        } => commands::validate(&file, kind, tolerance),
        Command::Normalize { catalog, out } => {
            let json = commands::normalize(&catalog, out.as_deref())?;
            Ok(if out.is_some() { String::new() } else { json })
        }
        Command::Serve { config } => {
            let config = BrokerConfig::from_file(&config).map_err(|e| match e {
                rfbroker_service::ConfigError::Read { .. } => CliError::io(e.to_string()),
                other => CliError::invalid(other.to_string()),
            })?;
            env_logger::Builder::from_env(
                env_logger::Env::default().default_filter_or(&config.log_level),
            )
            .init();
            let runtime = tokio_runtime()?;
            runtime
                .block_on(rfbroker_service::serve(config))
                .map_err(|e| CliError::io(e.to_string()))?;
            Ok(String::new())
        }
    }
}

fn tokio_runtime() -> Result<tokio::runtime::Runtime, CliError> {
    tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::io(format!("cannot start runtime: {e}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            if !out.is_empty() {
                print!("{out}");
                if !out.ends_with('\n') {
                    println!();
                }
            }
            ExitCode::from(exit::SUCCESS)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
