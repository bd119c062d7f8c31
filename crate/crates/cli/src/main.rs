use clap::{Parser, Subcommand};
use copboost::error::Error;
use copboost_cli::commands;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "copboost",
    version,
    about = "Bivariate distributional copula regression by non-cyclic gradient boosting"
)]
struct Cli {
    /// Size of the worker thread pool (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw a synthetic dataset (plus truth file) from a scenario preset
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output data CSV; the truth CSV lands next to it
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit the boosted copula model and write the model file and trace
    Fit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Output model JSON
        #[arg(long)]
        out: PathBuf,
        /// Trace CSV (default: <out>.trace.csv)
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the oobag-optimal stopping iteration of a trace file
    Tune {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Predictor and parameter values for a dataset
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Replay the ensemble only up to this iteration
        #[arg(long)]
        at_iteration: Option<usize>,
    },
    /// Evaluate a fitted model on one partition of a dataset
    Score {
        /// Optional config providing [score] settings
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Partition to evaluate: train | mstop | test (default test)
        #[arg(long)]
        partition: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Aggregate replicate directories into summary tables
    Report {
        #[arg(long)]
        dir: PathBuf,
        /// Output directory for the summary CSVs
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> copboost::Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    }
    match cli.cmd {
        Cmd::Simulate { config, out, seed } => commands::cmd_simulate(&config, &out, seed),
        Cmd::Fit { config, data, out, trace, seed } => {
            commands::cmd_fit(&config, &data, &out, trace.as_deref(), seed)
        }
        Cmd::Tune { trace } => commands::cmd_tune(&trace).map(|_| ()),
        Cmd::Predict { model, data, out, at_iteration } => {
            commands::cmd_predict(&model, &data, &out, at_iteration)
        }
        Cmd::Score { config, model, data, out, partition, seed } => {
            commands::cmd_score(config.as_deref(), &model, &data, &out, partition.as_deref(), seed)
        }
        Cmd::Report { dir, out } => commands::cmd_report(&dir, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Config(_) => 2,
                Error::Data(_) => 3,
                Error::Domain(_) | Error::Numeric(_) => 4,
            };
            ExitCode::from(code)
        }
    }
}
