//! Command-line front end: reads a JSON experiment config, runs it, and
//! emits a CSV or JSON result table.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};

use erw_cli::config::parse_config;
use erw_cli::runner::run_experiment;
use erw_cli::table::OutputFormat;
use erw_cli::CliError;

#[derive(Parser)]
#[command(name = "erw-cli", version, about = "Elephant random walk experiments")]
struct Args {
    /// Path to a JSON experiment config.
    config: PathBuf,

    /// Output format for the result table.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Write the result table to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Worker threads for trial-parallel experiments (default: all cores).
    #[arg(long)]
    threads: Option<usize>,

    /// Check the config and exit without running the experiment.
    #[arg(long)]
    validate: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn run(args: &Args) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let config = parse_config(&text)?;
    if args.validate {
        println!("config ok: {}", config.experiment_name());
        return Ok(());
    }

    let started = Instant::now();
    let table = match args.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Resource(e.to_string()))?
            .install(|| run_experiment(&config)),
        None => run_experiment(&config),
    }?;
    // timing goes to stderr so the emitted table is byte-identical across runs
    eprintln!(
        "{} finished in {:.3}s",
        config.experiment_name(),
        started.elapsed().as_secs_f64()
    );

    let rendered = table.render(match args.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::Json,
    });
    match &args.output {
        Some(path) => fs::write(path, rendered).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?,
        None => print!("{rendered}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
