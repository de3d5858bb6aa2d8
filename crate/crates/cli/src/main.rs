//! `fso-qos`: attenuation and link sweeps, surrogate data, model training,
//! evaluation and prediction for fog-limited free-space optical links.
//!
//! Exit status: 0 success, 1 I/O or other failure, 2 usage, 3 validation,
//! 4 parse, 5 training.

mod commands;
mod config;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fso_qos::{Error, Parallelism};

use commands::{CommandError, RunContext};
use config::{ConfigError, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "fso-qos", version, about = "FSO link quality under fog: sweeps, training and prediction")]
struct Cli {
    /// Overrides the seed from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// key = value parameter file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,

    /// Comma-separated station names.
    #[arg(long, global = true, value_delimiter = ',')]
    stations: Vec<String>,

    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Extinction and specific attenuation over visibility × wavelength.
    AttenuationSweep {
        /// Visibility grid in km, `a,b,c` or `start:stop:step`.
        #[arg(long)]
        visibility: Option<String>,
        /// Wavelength grid in nm.
        #[arg(long)]
        wavelengths: Option<String>,
    },
    /// Data rate, received power, BER, capacity and power-penalty tables.
    LinkSweep,
    /// Seeded surrogate visibility observations for the selected stations.
    SynthData,
    /// Fit the five regressors on the QoS table and save them.
    Train {
        /// Visibility CSV; synthesised when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
    },
    /// Score saved models on the held-out split.
    Evaluate {
        #[arg(long)]
        models: Option<PathBuf>,
        #[arg(long)]
        test: Option<PathBuf>,
    },
    /// Append a prediction column to a feature CSV.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CommandError>() {
            return match e {
                CommandError::Usage(_) => 2,
                CommandError::Validation(_) => 3,
                CommandError::Training(_) => 5,
            };
        }
        if cause.is::<ConfigError>() {
            return 3;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Domain(_)
                | Error::Dimension { .. }
                | Error::MissingStation(_)
                | Error::Unattainable(_)
                | Error::Schema(_) => 3,
                Error::Parse { .. } | Error::Json(_) | Error::Csv(_) => 4,
                Error::Training(_) => 5,
                Error::Io(_) => 1,
            };
        }
        if cause.is::<csv::Error>() || cause.is::<serde_json::Error>() {
            return 4;
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => {
            if !p.is_file() {
                return Err(CommandError::Validation(format!("config file {} does not exist", p.display())).into());
            }
            RunConfig::from_file(p)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let ctx = RunContext {
        cfg,
        out_dir: cli.out_dir,
        stations: cli.stations.into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        mode: if cli.sequential { Parallelism::Sequential } else { Parallelism::Parallel },
    };
    match &cli.command {
        Command::AttenuationSweep { visibility, wavelengths } => {
            commands::attenuation_sweep(&ctx, visibility.as_deref(), wavelengths.as_deref())
        }
        Command::LinkSweep => commands::link_sweep(&ctx),
        Command::SynthData => commands::synth_data(&ctx),
        Command::Train { data } => commands::train(&ctx, data.as_deref()),
        Command::Evaluate { models, test } => commands::evaluate(&ctx, models.as_deref(), test.as_deref()),
        Command::Predict { model, input, output } => commands::predict(&ctx, model, input, output.as_deref()),
    }
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
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
