//! Result serialization.
//!
//! CSV files carry a fixed header per row kind; floats are printed with 17
//! significant digits so parsed values are bit-identical to the originals.
//! JSON output is a single array of row objects tagged with `"kind"`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heavy_tail::RNG_ALGORITHM;

use super::config::ExperimentConfig;
use super::run::{DiagnosticRow, EstimateRow, ExperimentResult};

/// Output encoding for experiment results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown output format `{other}` (expected csv or json)"
            ))),
        }
    }
}

pub const ESTIMATE_HEADER: [&str; 9] = [
    "n",
    "k",
    "replication",
    "gamma_hat",
    "sigma_hat",
    "sigma_ratio",
    "hill_hat",
    "iterations",
    "converged",
];

pub const DIAGNOSTIC_HEADER: [&str; 5] =
    ["lemma", "grid_point", "empirical", "limit", "abs_error"];

/// 17 significant digits: enough to reproduce any f64 exactly on parse.
fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

fn format_optional(value: Option<f64>) -> String {
    value.map(format_float).unwrap_or_default()
}

/// A row of either kind, tagged for JSON output.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResultRow {
    Estimate(EstimateRow),
    Diagnostic(DiagnosticRow),
}

fn write_estimates_csv<W: Write>(rows: &[EstimateRow], writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(ESTIMATE_HEADER)?;
    for row in rows {
        csv.write_record([
            row.n.to_string(),
            row.k.to_string(),
            row.replication.to_string(),
            format_optional(row.gamma_hat),
            format_optional(row.sigma_hat),
            format_optional(row.sigma_ratio),
            format_optional(row.hill_hat),
            row.iterations.to_string(),
            row.converged.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

fn write_diagnostics_csv<W: Write>(rows: &[DiagnosticRow], writer: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(DIAGNOSTIC_HEADER)?;
    for row in rows {
        csv.write_record([
            row.lemma.clone(),
            format_float(row.grid_point),
            format_float(row.empirical),
            format_float(row.limit),
            format_float(row.abs_error),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

fn write_json<W: Write>(result: &ExperimentResult, writer: W) -> Result<()> {
    let rows: Vec<ResultRow> = result
        .rows
        .iter()
        .cloned()
        .map(ResultRow::Estimate)
        .chain(
            result
                .diagnostics
                .iter()
                .cloned()
                .map(ResultRow::Diagnostic),
        )
        .collect();
    let mut writer = writer;
    serde_json::to_writer(&mut writer, &rows)?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Writes a result to a single stream. For CSV the estimate rows take
/// precedence; diagnostic rows go to the same stream only when no estimate
/// rows are present (mixed results need [`emit_results`] and two files).
pub fn write_result<W: Write>(
    result: &ExperimentResult,
    writer: W,
    format: OutputFormat,
) -> Result<()> {
    match format {
        OutputFormat::Json => write_json(result, writer),
        OutputFormat::Csv => {
            if result.rows.is_empty() {
                write_diagnostics_csv(&result.diagnostics, writer)
            } else {
                if !result.diagnostics.is_empty() {
                    log::warn!(
                        "CSV stream carries only estimate rows; use a file destination \
                         to also emit the {} diagnostic rows",
                        result.diagnostics.len()
                    );
                }
                write_estimates_csv(&result.rows, writer)
            }
        }
    }
}

/// Writes a result to `path`, returning every file written.
///
/// JSON always produces one file. CSV writes estimate rows to `path` and,
/// when both kinds are present, diagnostic rows to a sibling file whose
/// extension is replaced by `diagnostics.csv`.
pub fn emit_results(
    result: &ExperimentResult,
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<Vec<PathBuf>> {
    let path = path.as_ref();
    let open = |p: &Path| -> Result<BufWriter<File>> {
        File::create(p)
            .map(BufWriter::new)
            .map_err(|err| Error::Config(format!("cannot write {}: {err}", p.display())))
    };

    match format {
        OutputFormat::Json => {
            write_json(result, open(path)?)?;
            Ok(vec![path.to_path_buf()])
        }
        OutputFormat::Csv => {
            let mut written = Vec::new();
            if result.rows.is_empty() {
                write_diagnostics_csv(&result.diagnostics, open(path)?)?;
                written.push(path.to_path_buf());
            } else {
                write_estimates_csv(&result.rows, open(path)?)?;
                written.push(path.to_path_buf());
                if !result.diagnostics.is_empty() {
                    let sibling = path.with_extension("diagnostics.csv");
                    write_diagnostics_csv(&result.diagnostics, open(&sibling)?)?;
                    written.push(sibling);
                }
            }
            Ok(written)
        }
    }
}

/// Writes a run manifest next to the results: the resolved configuration
/// plus the generator and seed-derivation provenance.
pub fn write_run_manifest(config: &ExperimentConfig, path: impl AsRef<Path>) -> Result<()> {
    #[derive(Serialize)]
    struct Manifest<'a> {
        rng_algorithm: &'static str,
        seed_derivation: &'static str,
        config: &'a ExperimentConfig,
    }
    let manifest = Manifest {
        rng_algorithm: RNG_ALGORITHM,
        seed_derivation: "splitmix64(splitmix64(splitmix64(root_seed) + stream) + replication_index)",
        config,
    };
    let mut writer = BufWriter::new(File::create(path.as_ref())?);
    serde_json::to_writer_pretty(&mut writer, &manifest)?;
    writer.write_all(b"\n")?;
    Ok(())
}
