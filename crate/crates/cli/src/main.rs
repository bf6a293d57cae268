use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;

use config::{ExperimentConfig, Format};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "cheshire", version, about = "Post-selected path/polarization pointer statistics")]
struct Cli {
    /// Experiment description (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for output files; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Weak values, normalization, moments, limits and the Cheshire parameter.
    Analyze {
        /// Also write `density.csv` on an N x N grid (needs --out).
        #[arg(long, value_name = "N")]
        density_grid: Option<usize>,
    },
    /// Monte Carlo trials and the signed-product estimator.
    Sample,
    /// Compare the closed-form density with the brute-force grid oracle.
    OracleCheck,
    /// Recompute the report while stepping config parameters.
    Sweep {
        /// Comma-separated dotted paths, all set to each value.
        #[arg(long, value_delimiter = ',', required = true)]
        param: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
    },
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("CHESHIRE_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| CliError::Config(format!("CHESHIRE_THREADS: not a thread count: {v:?}")))?;
        if n == 0 {
            return Err(CliError::Config("CHESHIRE_THREADS: must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("building thread pool")?;
    }
    Ok(())
}

fn read_config(path: Option<&Path>) -> Result<(String, ExperimentConfig)> {
    let path = path.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg = ExperimentConfig::from_toml(&text)?;
    Ok((text, cfg))
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    let (text, cfg) = read_config(cli.config.as_deref())?;
    let output = cfg.output();
    let out = cli.out.clone().or(output.dir.map(PathBuf::from));
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let out = out.as_deref();
    let report_format = cli.format.or(output.format).unwrap_or(Format::Json);

    match cli.command {
        Command::Analyze { density_grid } => {
            let report = commands::analyze(&cfg)?;
            if let Some(n) = density_grid.or(output.density_grid) {
                let dir = out.ok_or_else(|| CliError::Config("--density-grid needs --out".into()))?;
                commands::write_density_csv(&cfg.experiment()?, n, &dir.join("density.csv"))?;
            }
            commands::emit_report(&report, "analyze", report_format, out)
        }
        Command::Sample => {
            let report = commands::sample(&cfg, out)?;
            commands::emit_report(&report, "summary", report_format, out)
        }
        Command::OracleCheck => {
            let (report, failure) = commands::oracle(&cfg)?;
            commands::emit_report(&report, "oracle", report_format, out)?;
            match failure {
                Some(f) => Err(f.into()),
                None => Ok(()),
            }
        }
        Command::Sweep { param, values } => {
            let rows = commands::sweep(&text, &param, &values)?;
            let format = cli.format.or(output.format).unwrap_or(Format::Csv);
            commands::emit(&commands::render_rows(&rows, format)?, "sweep", format, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
            ExitCode::from(code)
        }
    }
}
