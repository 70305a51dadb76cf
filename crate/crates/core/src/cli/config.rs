//! Command-line flags, the optional TOML file and their merge.
//!
//! Flags win over the file, the file wins over built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytic::ProblemParams;
use crate::noneven::StopCriteria;
use crate::verify::VerifyTolerances;

use super::CliError;

#[derive(Debug, Parser)]
#[command(name = "liouville", version, about = "Solutions, spectra and the symmetry-breaking branch of u'' + lambda h(x, alpha) e^u = 0")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// beta1, beta2 and the corresponding lambda values.
    SpecialPoints(Common),
    /// Lambda, eigenvalues and Morse index over a grid of amplitudes.
    EvenBranch {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Lowest eigenvalues of the linearization at one even solution.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        spectrum: SpectrumArgs,
    },
    /// Trace the non-even branch from beta2.
    NonevenBranch {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        stops: ContinuationArgs,
    },
    /// Re-verify every solution record in a file written by this tool.
    Verify {
        path: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write an SVG plot next to --out.
    #[arg(long)]
    pub plot: bool,
    /// Logarithmic lambda axis in plots.
    #[arg(long)]
    pub log_lambda: bool,
    /// TOML file with defaults for any of these settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub ode_tol: Option<f64>,
    #[arg(long)]
    pub green_tol: Option<f64>,
    #[arg(long)]
    pub symmetry_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub beta_min: Option<f64>,
    #[arg(long)]
    pub beta_max: Option<f64>,
    #[arg(long)]
    pub beta_step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub beta: Option<f64>,
    /// Number of eigenvalues.
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ContinuationArgs {
    #[arg(long)]
    pub min_lambda: Option<f64>,
    #[arg(long)]
    pub max_supnorm: Option<f64>,
    #[arg(long)]
    pub max_points: Option<usize>,
    /// Largest arclength step.
    #[arg(long)]
    pub max_step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    alpha: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    plot: Option<bool>,
    log_lambda: Option<bool>,
    #[serde(default)]
    beta_grid: FileGrid,
    #[serde(default)]
    spectrum: FileSpectrum,
    #[serde(default)]
    continuation: FileContinuation,
    #[serde(default)]
    tolerances: FileTolerances,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileGrid {
    min: Option<f64>,
    max: Option<f64>,
    step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSpectrum {
    beta: Option<f64>,
    count: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileContinuation {
    min_lambda: Option<f64>,
    max_supnorm: Option<f64>,
    max_points: Option<usize>,
    max_step: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileTolerances {
    ode: Option<f64>,
    green: Option<f64>,
    symmetry: Option<f64>,
}

/// Requested amplitude grid; unset ends default to `beta1 / 2` and `2 beta2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridRequest {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Continuation {
    pub min_lambda: f64,
    pub max_supnorm: f64,
    pub max_points: usize,
    pub max_step: f64,
}

impl Continuation {
    pub fn stop(&self) -> StopCriteria {
        StopCriteria {
            max_supnorm: self.max_supnorm,
            min_lambda: self.min_lambda,
            max_points: self.max_points,
        }
    }
}

/// The fully resolved settings of one run, echoed into JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub alpha: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub plot: bool,
    pub log_lambda: bool,
    pub beta_grid: GridRequest,
    pub spectrum_beta: f64,
    pub spectrum_count: usize,
    pub continuation: Continuation,
    pub tolerances: VerifyTolerances,
}

impl RunConfig {
    pub fn params(&self) -> ProblemParams {
        ProblemParams::new(self.alpha).expect("alpha validated")
    }

    /// Where the plot goes: `--out` with its extension replaced by `.svg`.
    pub fn plot_path(&self) -> Option<PathBuf> {
        self.out.as_ref().map(|p| p.with_extension("svg"))
    }
}

fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

pub fn resolve(
    command: &'static str,
    common: &Common,
    grid: Option<&GridArgs>,
    spectrum: Option<&SpectrumArgs>,
    stops: Option<&ContinuationArgs>,
) -> Result<RunConfig, CliError> {
    let file = match &common.config {
        Some(p) => load_file(p)?,
        None => FileConfig::default(),
    };
    let defaults = StopCriteria::default();
    let verify_defaults = VerifyTolerances::default();

    let alpha = common.alpha.or(file.alpha).unwrap_or(0.5);
    ProblemParams::new(alpha).map_err(|e| CliError::Config(e.to_string()))?;

    let beta_grid = GridRequest {
        min: grid.and_then(|g| g.beta_min).or(file.beta_grid.min),
        max: grid.and_then(|g| g.beta_max).or(file.beta_grid.max),
        step: grid.and_then(|g| g.beta_step).or(file.beta_grid.step),
    };
    for (name, v) in [("beta-min", beta_grid.min), ("beta-max", beta_grid.max), ("beta-step", beta_grid.step)] {
        if let Some(v) = v {
            positive(name, v)?;
        }
    }
    if let (Some(lo), Some(hi)) = (beta_grid.min, beta_grid.max) {
        if hi <= lo {
            return Err(CliError::Config(format!("beta-max {hi} must exceed beta-min {lo}")));
        }
    }

    let spectrum_beta = positive("beta", spectrum.and_then(|s| s.beta).or(file.spectrum.beta).unwrap_or(1.0))?;
    let spectrum_count = spectrum.and_then(|s| s.count).or(file.spectrum.count).unwrap_or(3);
    if spectrum_count == 0 {
        return Err(CliError::Config("count must be at least 1".into()));
    }

    let continuation = Continuation {
        min_lambda: positive(
            "min-lambda",
            stops.and_then(|s| s.min_lambda).or(file.continuation.min_lambda).unwrap_or(defaults.min_lambda),
        )?,
        max_supnorm: positive(
            "max-supnorm",
            stops.and_then(|s| s.max_supnorm).or(file.continuation.max_supnorm).unwrap_or(defaults.max_supnorm),
        )?,
        max_points: stops.and_then(|s| s.max_points).or(file.continuation.max_points).unwrap_or(defaults.max_points),
        max_step: positive(
            "max-step",
            stops.and_then(|s| s.max_step).or(file.continuation.max_step).unwrap_or(0.1),
        )?,
    };
    if continuation.max_points == 0 {
        return Err(CliError::Config("max-points must be at least 1".into()));
    }

    let tolerances = VerifyTolerances {
        ode: positive("ode-tol", common.ode_tol.or(file.tolerances.ode).unwrap_or(verify_defaults.ode))?,
        green: positive("green-tol", common.green_tol.or(file.tolerances.green).unwrap_or(verify_defaults.green))?,
        symmetry: positive(
            "symmetry-tol",
            common.symmetry_tol.or(file.tolerances.symmetry).unwrap_or(verify_defaults.symmetry),
        )?,
    };

    let config = RunConfig {
        command,
        alpha,
        format: common.format.or(file.format).unwrap_or(Format::Csv),
        out: common.out.clone().or(file.out),
        plot: common.plot || file.plot.unwrap_or(false),
        log_lambda: common.log_lambda || file.log_lambda.unwrap_or(false),
        beta_grid,
        spectrum_beta,
        spectrum_count,
        continuation,
        tolerances,
    };
    if config.plot && config.out.is_none() {
        return Err(CliError::Config("--plot needs --out to name the plot file".into()));
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common(args: &[&str]) -> Common {
        let mut full = vec!["liouville", "special-points"];
        full.extend_from_slice(args);
        match Cli::parse_from(full).command {
            Command::SpecialPoints(c) => c,
            _ => unreachable!(),
        }
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "alpha = 0.3\nformat = \"json\"\n[tolerances]\node = 1e-6\n").unwrap();
        let p = path.to_str().unwrap();

        let cfg = resolve("x", &common(&["--config", p]), None, None, None).unwrap();
        assert_eq!((cfg.alpha, cfg.format, cfg.tolerances.ode), (0.3, Format::Json, 1e-6));
        assert_eq!(cfg.tolerances.green, 1e-7);

        let cfg = resolve("x", &common(&["--config", p, "--alpha", "0.7", "--format", "csv"]), None, None, None).unwrap();
        assert_eq!((cfg.alpha, cfg.format), (0.7, Format::Csv));

        let cfg = resolve("x", &common(&[]), None, None, None).unwrap();
        assert_eq!((cfg.alpha, cfg.format), (0.5, Format::Csv));
    }

    #[test]
    fn invalid_settings_are_config_errors() {
        for args in [&["--alpha", "1.0"][..], &["--alpha=-0.2"], &["--plot"], &["--ode-tol", "0"]] {
            let r = resolve("x", &common(args), None, None, None);
            assert!(matches!(r, Err(CliError::Config(_))), "{args:?}");
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "alpah = 0.3\n").unwrap();
        let r = resolve("x", &common(&["--config", path.to_str().unwrap()]), None, None, None);
        assert!(matches!(r, Err(CliError::Config(_))));
    }
}
