//! Run configuration: JSON file plus command-line flags, flags winning.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;
use spectral_gap::eigensolver::DEFAULT_TOL;
use spectral_gap::{PotentialKind, PotentialSpec};

use crate::CliError;

pub const DEFAULT_L_MIN: f64 = 50.0;
pub const DEFAULT_L_MAX: f64 = 1600.0;
pub const DEFAULT_POINTS: usize = 9;
pub const JOBS_ENV: &str = "SGL_JOBS";

/// Every configurable field, all optional. Shared by the JSON file and the
/// flags so that merging is field by field.
#[derive(Debug, Clone, Default, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ConfigArgs {
    /// JSON config file; flags override its values
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Potential family: step, trapezoid, bump or zero
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<PotentialKind>,

    /// Half-width of the support [-b, b]
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,

    /// Peak value of the potential
    #[arg(long, allow_hyphen_values = true)]
    pub height: Option<f64>,

    /// Plateau half-width (end of the monotone ramp)
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,

    /// Floor of the potential on [-eps, 0]
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,

    /// Interval length for single solves
    #[arg(long = "L", allow_hyphen_values = true)]
    #[serde(rename = "L")]
    pub length: Option<f64>,

    /// Smallest sweep length
    #[arg(long = "L-min", allow_hyphen_values = true)]
    #[serde(rename = "L_min")]
    pub l_min: Option<f64>,

    /// Largest sweep length
    #[arg(long = "L-max", allow_hyphen_values = true)]
    #[serde(rename = "L_max")]
    pub l_max: Option<f64>,

    /// Number of geometrically spaced sweep lengths
    #[arg(long)]
    pub points: Option<usize>,

    /// Relative tolerance of the extrapolated eigenvalues
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,

    /// Worker threads (falls back to SGL_JOBS, then to all cores)
    #[arg(long)]
    pub jobs: Option<usize>,
}

fn parse_kind(s: &str) -> Result<PotentialKind, String> {
    match s {
        "step" => Ok(PotentialKind::Step),
        "trapezoid" => Ok(PotentialKind::Trapezoid),
        "bump" => Ok(PotentialKind::TruncatedBump),
        "zero" => Ok(PotentialKind::Zero),
        other => Err(format!("unknown potential kind '{other}'")),
    }
}

impl ConfigArgs {
    /// Fields set in `self` win over `base`.
    fn over(self, base: ConfigArgs) -> ConfigArgs {
        ConfigArgs {
            config: self.config.or(base.config),
            kind: self.kind.or(base.kind),
            b: self.b.or(base.b),
            height: self.height.or(base.height),
            eps: self.eps.or(base.eps),
            gamma: self.gamma.or(base.gamma),
            length: self.length.or(base.length),
            l_min: self.l_min.or(base.l_min),
            l_max: self.l_max.or(base.l_max),
            points: self.points.or(base.points),
            tol: self.tol.or(base.tol),
            jobs: self.jobs.or(base.jobs),
        }
    }

    /// Loads the config file, if any, and lays the flags over it.
    pub fn merged(self) -> Result<ConfigArgs, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: ConfigArgs = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        Ok(self.over(file))
    }

    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let args = self.merged()?;
        let kind = args.kind.unwrap_or(PotentialKind::Step);
        let b = args.b.unwrap_or(0.5);
        let height = args.height.unwrap_or(match kind {
            PotentialKind::Zero => 0.0,
            _ => 1.0,
        });
        let eps = args.eps.unwrap_or(match kind {
            PotentialKind::Trapezoid | PotentialKind::TruncatedBump => 0.5 * b,
            _ => b,
        });
        let defaults = match kind {
            PotentialKind::Step => PotentialSpec::step(b, height),
            PotentialKind::Trapezoid => PotentialSpec::trapezoid(b, eps, height),
            PotentialKind::TruncatedBump => PotentialSpec::bump(b, eps, height),
            PotentialKind::Zero => PotentialSpec::zero(b),
        };
        let spec = PotentialSpec::new(kind, b, height, eps, args.gamma.unwrap_or(defaults.gamma));
        spec.validate_shape()
            .map_err(|e| CliError::Config(e.to_string()))?;

        let tol = args.tol.unwrap_or(DEFAULT_TOL);
        if !(tol.is_finite() && tol > 0.0) {
            return Err(CliError::Config(format!("tol must be positive, got {tol}")));
        }
        if let Some(l) = args.length {
            check_length(l)?;
        }
        let grid = LengthGrid::new(
            args.l_min.unwrap_or(DEFAULT_L_MIN),
            args.l_max.unwrap_or(DEFAULT_L_MAX),
            args.points.unwrap_or(DEFAULT_POINTS),
        )?;
        if args.jobs == Some(0) {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }

        Ok(RunConfig {
            spec,
            length: args.length,
            grid,
            tol,
            jobs: args.jobs,
        })
    }
}

fn check_length(l: f64) -> Result<(), CliError> {
    if l.is_finite() && l > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config("L must be positive".into()))
    }
}

/// Geometric grid of interval lengths, endpoints included exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LengthGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl LengthGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self, CliError> {
        check_length(min)?;
        check_length(max)?;
        if !(min < max) {
            return Err(CliError::Config(format!(
                "L_min must be below L_max, got {min} and {max}"
            )));
        }
        if points < 2 {
            return Err(CliError::Config(format!(
                "points must be at least 2, got {points}"
            )));
        }
        Ok(Self { min, max, points })
    }

    pub fn values(&self) -> Vec<f64> {
        let last = self.points - 1;
        let ratio = self.max / self.min;
        (0..self.points)
            .map(|i| match i {
                0 => self.min,
                i if i == last => self.max,
                i => self.min * ratio.powf(i as f64 / last as f64),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: PotentialSpec,
    /// Single length for `solve` and `quantization`.
    pub length: Option<f64>,
    pub grid: LengthGrid,
    pub tol: f64,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn single_length(&self) -> Result<f64, CliError> {
        self.length
            .ok_or_else(|| CliError::Config("--L is required for this command".into()))
    }

    /// `--jobs`, else `SGL_JOBS`, else 0 (all cores).
    pub fn worker_threads(&self) -> Result<usize, CliError> {
        if let Some(j) = self.jobs {
            return Ok(j);
        }
        match std::env::var(JOBS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&j| j > 0)
                .ok_or_else(|| {
                    CliError::Config(format!("{JOBS_ENV} must be a positive integer, got '{v}'"))
                }),
            Err(_) => Ok(0),
        }
    }
}
