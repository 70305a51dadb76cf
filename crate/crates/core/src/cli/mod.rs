//! The `liouville` command-line program.
//!
//! Exit codes: 0 on success, 1 when a computation or verification fails,
//! 2 for invalid settings or unreadable input.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::Parser;
use serde_json::json;

mod commands;
pub mod config;
mod records;
pub mod svg;
pub mod table;

use crate::verify::verify;
use commands::Output;
use config::{resolve, Cli, Command, Format, RunConfig};
use table::Row;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Compute(m) => write!(f, "computation failed: {m}"),
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Compute(format!("write failed: {e}"))
    }
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("liouville: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::SpecialPoints(common) => {
            let cfg = resolve("special-points", &common, None, None, None)?;
            emit(&cfg, commands::special_points(&cfg)?)
        }
        Command::EvenBranch { common, grid } => {
            let cfg = resolve("even-branch", &common, Some(&grid), None, None)?;
            emit(&cfg, commands::even_branch(&cfg)?)
        }
        Command::Spectrum { common, spectrum } => {
            let cfg = resolve("spectrum", &common, None, Some(&spectrum), None)?;
            emit(&cfg, commands::spectrum(&cfg)?)
        }
        Command::NonevenBranch { common, stops } => {
            let cfg = resolve("noneven-branch", &common, None, None, Some(&stops))?;
            emit(&cfg, commands::noneven_branch(&cfg)?)
        }
        Command::Verify { path, common } => {
            let cfg = resolve("verify", &common, None, None, None)?;
            verify_file(&cfg, &path)
        }
    }
}

fn write_output(cfg: &RunConfig, rows: &[Row], results: &serde_json::Value) -> Result<(), CliError> {
    let sink: Box<dyn Write> = match &cfg.out {
        Some(p) => Box::new(File::create(p).map_err(|e| CliError::Compute(format!("cannot create {}: {e}", p.display())))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut sink = BufWriter::new(sink);
    match cfg.format {
        Format::Csv => table::write_csv(&mut sink, rows)?,
        Format::Json => table::write_json(
            &mut sink,
            &json!({ "config": cfg, "results": results, "version": VERSION }),
        )?,
    }
    sink.flush()?;
    Ok(())
}

fn emit(cfg: &RunConfig, output: Output) -> Result<(), CliError> {
    write_output(cfg, &output.rows, &output.results)?;
    if let (Some(plot), Some(path)) = (&output.plot, cfg.plot_path()) {
        std::fs::write(&path, plot.render()).map_err(|e| CliError::Compute(format!("cannot write {}: {e}", path.display())))?;
    }
    match output.failure {
        Some(msg) => Err(CliError::Compute(msg)),
        None => Ok(()),
    }
}

fn verify_file(cfg: &RunConfig, path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let Some(records) = records::parse(&text)? else {
        eprintln!("liouville: warning: {} is empty, nothing to verify", path.display());
        return Ok(());
    };
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for rec in &records {
        let mut row: Row = vec![("record", rec.index.into()), ("kind", rec.kind.into())];
        let problem = match &rec.solution {
            Err(msg) => Some(msg.clone()),
            Ok(sol) => match verify(sol) {
                Err(e) => Some(e.to_string()),
                Ok(report) => {
                    row.extend([
                        ("ode_residual", report.ode_residual_sup.into()),
                        ("green_residual", report.green_residual_sup.into()),
                        ("matching_residual", report.matching_residual.into()),
                        ("symmetry_defect", report.symmetry_defect.into()),
                        ("positivity_ok", report.positivity_ok.into()),
                    ]);
                    let lambda_defect = rec.stored_lambda.map(|l| (l - sol.lambda).abs() / sol.lambda);
                    if !report.verified(&cfg.tolerances) {
                        Some(format!(
                            "ode residual {:.3e}, green residual {:.3e}, positive {}",
                            report.ode_residual_sup, report.green_residual_sup, report.positivity_ok
                        ))
                    } else if report.matching_residual > 1e-10 {
                        Some(format!("matching residual {:.3e}", report.matching_residual))
                    } else if lambda_defect.is_some_and(|d| !(d <= 1e-12)) {
                        Some(format!("stored lambda differs from Lambda(beta) by {:.3e}", lambda_defect.unwrap_or(f64::NAN)))
                    } else {
                        None
                    }
                }
            },
        };
        row.push(("passed", problem.is_none().into()));
        if let Some(msg) = problem {
            failures.push(format!("record {} ({}): {msg}", rec.index, rec.kind));
        }
        rows.push(row);
    }
    if cfg.out.is_some() {
        write_output(cfg, &rows, &table::rows_to_json(&rows))?;
    }
    for f in &failures {
        eprintln!("liouville: {f}");
    }
    println!("{} of {} records verified", records.len() - failures.len(), records.len());
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Compute(format!("{} records failed verification", failures.len())))
    }
}
