//! `skewsv`: simulate, fit, summarize and evaluate skew-normal stochastic
//! volatility models from the command line.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "skewsv", version, about = "Skew-normal stochastic volatility via HMC")]
struct Cli {
    /// Worker threads for chains and bands (0 = available cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by commands that read a run configuration.
#[derive(Debug, Args)]
pub struct RunArgs {
    /// Flat TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set n_iter=2000`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Prior profile: bonds or fx.
    #[arg(long)]
    pub profile: Option<String>,
    /// dynamic, static or none.
    #[arg(long)]
    pub skew_mode: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_iter: Option<usize>,
    #[arg(long)]
    pub n_burnin: Option<usize>,
    #[arg(long)]
    pub chains: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long)]
    pub label: Option<String>,
}

/// How to read a dated input file.
#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long, default_value = "date")]
    pub date_column: String,
    #[arg(long, default_value = "value")]
    pub value_column: String,
    #[arg(long, default_value = skewsv::data_io::ISO_DATE)]
    pub date_format: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate returns and latent paths from the model.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Series length (overrides sim_t).
        #[arg(long)]
        t: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit the posterior and write draws, diagnostics, tables and bands.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild tables and bands from stored draws.
    Summarize {
        /// A fit output directory or its `draws` subdirectory.
        #[arg(long)]
        draws: PathBuf,
        /// Observations the draws were fitted to (default: the fit's data.csv).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Reject draws produced under a different configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Expanding-window sign forecasts of the next observation.
    EvalForecast {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Last date of the first estimation window (YYYY-MM-DD).
        #[arg(long)]
        first_window_end: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Regress the posterior-mean shape path on covariates.
    Regress {
        /// `date,value` file of posterior-mean λ.
        #[arg(long)]
        lambda: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        covariates: Vec<PathBuf>,
        /// Coefficient names, one per covariate (default: file stems).
        #[arg(long, value_delimiter = ',')]
        names: Vec<String>,
        #[arg(long, default_value = "US")]
        label: String,
        #[arg(long, default_value_t = 1e-4)]
        prior_precision: f64,
        #[arg(long, default_value_t = 0.01)]
        prior_shape: f64,
        #[arg(long, default_value_t = 0.01)]
        prior_scale: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Return statistics in high and low volatility regimes.
    Regimes {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        series: SeriesArgs,
        /// `date,value` file of the posterior-mean scale.
        #[arg(long)]
        scale: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the numerical self-check suites.
    Check {
        #[arg(long, conflicts_with = "full")]
        quick: bool,
        #[arg(long)]
        full: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Other(format!("thread pool: {e}")))?;
    match cli.command {
        Command::Simulate { run, t, out } => commands::simulate(&run, t, &out),
        Command::Fit { data, series, run, out } => commands::fit(&data, &series, &run, &out),
        Command::Summarize { draws, data, config, label, out } => {
            commands::summarize(&draws, data.as_deref(), config.as_deref(), label, &out)
        }
        Command::EvalForecast { data, series, run, first_window_end, out } => {
            commands::eval_forecast(&data, &series, &run, &first_window_end, &out)
        }
        Command::Regress { lambda, covariates, names, label, prior_precision, prior_shape, prior_scale, out } => {
            let prior = skewsv::evaluation::RegressionPrior {
                precision: prior_precision,
                shape: prior_shape,
                scale: prior_scale,
            };
            commands::regress(&lambda, &covariates, &names, &label, prior, &out)
        }
        Command::Regimes { data, series, scale, out } => commands::regimes(&data, &series, &scale, &out),
        Command::Check { full, .. } => commands::check(full),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("skewsv: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
