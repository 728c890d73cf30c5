use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ipred_core::harness::{format_summary, run_to_dir, summarize_dir};
use ipred_core::link_adaptation::nr_table3_efficiencies;
use ipred_core::{Error, McsTable, PredictorKind, RunConfig};

/// CQI-driven interference prediction and link adaptation simulator.
#[derive(Debug, Parser)]
#[command(name = "ipred", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate drops and write records, summary and ECDFs.
    Run(RunArgs),
    /// Generate or validate an MCS table and write it as CSV.
    Table(TableArgs),
    /// Recompute the summary of a finished run directory.
    Summarize {
        #[arg(long = "in", value_name = "DIR")]
        input: PathBuf,
    },
    /// Print the default configuration.
    Defaults,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// TOML configuration; defaults are used when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    drops: Option<usize>,
    /// TTIs per drop, warm-up included.
    #[arg(long)]
    ttis: Option<usize>,
    /// Comma-separated subset of ekf, ma, genie.
    #[arg(long, value_delimiter = ',')]
    predictors: Option<Vec<PredictorKind>>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct TableSource {
    /// Finite-blocklength table for the configured packet size.
    #[arg(long)]
    analytic: bool,
    /// Existing CSV table to validate and copy.
    #[arg(long, value_name = "PATH")]
    load: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[command(flatten)]
    source: TableSource,
    /// Packet size in bits for the analytic table.
    #[arg(long, default_value_t = 160)]
    packet_bits: u32,
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

enum Failure {
    Config(Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::Parse { .. } => Failure::Config(e),
            other => Failure::Runtime(other),
        }
    }
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path).map_err(Failure::Config)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.run.seed = seed;
    }
    if let Some(drops) = args.drops {
        cfg.run.n_drops = drops;
    }
    if let Some(ttis) = args.ttis {
        cfg.run.n_ttis = ttis;
    }
    if let Some(predictors) = args.predictors {
        cfg.run.predictors = predictors;
    }
    if let Some(out) = args.out {
        cfg.run.output_path = out;
    }
    cfg.validate().map_err(Failure::Config)?;
    let dir = cfg.run.output_path.clone();
    let (_, summary) = run_to_dir(&cfg, &dir)?;
    print!("{}", format_summary(&summary));
    println!("\nwrote {}", dir.display());
    Ok(())
}

fn table(args: TableArgs) -> Result<(), Failure> {
    let table = match &args.source.load {
        Some(path) => McsTable::load_csv(path).map_err(Failure::Config)?,
        None => {
            if args.packet_bits == 0 {
                return Err(Failure::Config(Error::InvalidConfig("packet_bits must be positive".into())));
            }
            McsTable::analytic(args.packet_bits, &nr_table3_efficiencies())
        }
    };
    table.save_csv(&args.out)?;
    println!("wrote {} MCS entries to {}", table.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Table(args) => table(args),
        Command::Summarize { input } => summarize_dir(&input)
            .map(|s| print!("{}", format_summary(&s)))
            .map_err(Failure::from),
        Command::Defaults => RunConfig::default()
            .to_toml_string()
            .map(|s| print!("{s}"))
            .map_err(Failure::from),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
