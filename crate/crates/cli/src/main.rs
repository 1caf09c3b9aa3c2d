//! Command-line harness around the `heavytail` library: estimator sweeps,
//! lemma diagnostics, and one-shot fits on user data.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use heavytail::experiment::{
    emit_results, run_consistency, run_lemma_diagnostics, write_result, write_run_manifest,
    ExperimentConfig, ExperimentResult, OutputFormat,
};
use heavytail::gpd_lme::{solve_lme, LmeConfig};
use heavytail::tail_measure::ExcessSample;

#[derive(Parser)]
#[command(
    name = "heavytail",
    version,
    about = "Simulate heavy-tailed linear processes and fit excesses over high thresholds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(format: Format) -> Self {
        match format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment configuration (see the README for the schema).
    #[arg(long)]
    config: PathBuf,
    /// Output file; results go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Overrides `root_seed` from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of worker threads for replications (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the estimator sweep over the configured (n, k) grid.
    Consistency(ExperimentArgs),
    /// Evaluate the tail-measure diagnostic grids against their limits.
    Diagnostics(ExperimentArgs),
    /// Fit the excesses of a data series read from a CSV file.
    Fit {
        /// Single-column CSV of real values; a non-numeric first line is
        /// treated as a header.
        data: PathBuf,
        /// Number of excesses over the (k+1)th largest absolute value.
        #[arg(long)]
        k: usize,
        /// Moment order of the fit (r < 1/2, r != 0).
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        r: f64,
        /// Output file; the fit goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output encoding.
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Consistency(args) => run_experiment(args, run_consistency),
        Command::Diagnostics(args) => run_experiment(args, run_lemma_diagnostics),
        Command::Fit {
            data,
            k,
            r,
            out,
            format,
        } => run_fit(&data, k, r, out.as_deref(), format),
    }
}

fn run_experiment(
    args: ExperimentArgs,
    runner: fn(&ExperimentConfig) -> heavytail::Result<ExperimentResult>,
) -> Result<()> {
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("failed to configure the worker pool")?;
    }

    let mut config = ExperimentConfig::load(&args.config)
        .with_context(|| format!("failed to load config {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        config.root_seed = seed;
    }

    let result = runner(&config)?;
    match &args.out {
        Some(path) => {
            let written = emit_results(&result, path, args.format.into())?;
            let manifest = manifest_path(path);
            write_run_manifest(&config, &manifest)?;
            for file in written {
                eprintln!("wrote {}", file.display());
            }
            eprintln!("wrote {}", manifest.display());
        }
        None => {
            let stdout = std::io::stdout();
            write_result(&result, stdout.lock(), args.format.into())?;
        }
    }
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn run_fit(data: &Path, k: usize, r: f64, out: Option<&Path>, format: Format) -> Result<()> {
    let series = read_series(data)?;
    let sample = ExcessSample::new(&series, k)?;
    let fit = solve_lme(sample.excesses(), &LmeConfig::with_r(r))?;

    let rendered = match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&fit)?;
            text.push('\n');
            text
        }
        Format::Csv => {
            let header = "theta_hat,gamma_hat,sigma_hat,k,r,iterations,converged,final_residual";
            format!(
                "{header}\n{:.16e},{:.16e},{:.16e},{},{:.16e},{},{},{:.16e}\n",
                fit.theta_hat,
                fit.gamma_hat,
                fit.sigma_hat,
                fit.k,
                fit.r,
                fit.iterations,
                fit.converged,
                fit.final_residual
            )
        }
    };
    match out {
        Some(path) => {
            let mut file = File::create(path)
                .with_context(|| format!("cannot write {}", path.display()))?;
            file.write_all(rendered.as_bytes())?;
        }
        None => print!("{rendered}"),
    }
    Ok(())
}

/// Reads a single-column CSV of reals. The first field of each line is used,
/// an unparseable first line is treated as a header, and any later parse
/// failure is an error.
fn read_series(path: &Path) -> Result<Vec<f64>> {
    let reader =
        BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?);
    let mut series = Vec::new();
    for (line_number, line) in reader.lines().enumerate() {
        let line = line?;
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<f64>() {
            Ok(value) => series.push(value),
            Err(_) if line_number == 0 => continue, // header
            Err(err) => bail!(
                "{}:{}: cannot parse `{field}` as a real number: {err}",
                path.display(),
                line_number + 1
            ),
        }
    }
    if series.is_empty() {
        bail!("{}: no numeric data found", path.display());
    }
    Ok(series)
}
