use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use frank_defect::frank::{FrankConstants, K4Convention};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Solve,
    Energy,
    Verify,
    Sweep,
    Probe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    MinusK2,
    AlphaMinusK2,
    Explicit,
}

impl From<Convention> for K4Convention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::MinusK2 => K4Convention::MinusK2,
            Convention::AlphaMinusK2 => K4Convention::AlphaMinusK2,
            Convention::Explicit => K4Convention::Explicit,
        }
    }
}

/// Flags shared by every subcommand. A config file supplies the same keys;
/// flags given on the command line win.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Flags {
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub k2: Option<f64>,
    #[arg(long)]
    pub k3: Option<f64>,
    #[arg(long, value_enum)]
    pub k4_convention: Option<Convention>,
    /// Saddle-splay constant, required with `--k4-convention explicit`.
    #[arg(long, allow_negative_numbers = true)]
    pub k4: Option<f64>,
    /// Value of psi at theta = pi/2.
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_steps: Option<usize>,
    #[arg(long)]
    pub grid_r: Option<usize>,
    #[arg(long)]
    pub grid_theta: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random perturbations for `probe` and `verify`.
    #[arg(long)]
    pub probes: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Read angles in degrees.
    #[arg(long)]
    #[serde(default)]
    pub degrees: bool,
}

impl Flags {
    /// Fields set here take precedence over `base`.
    fn over(self, base: Flags) -> Flags {
        Flags {
            k1: self.k1.or(base.k1),
            k2: self.k2.or(base.k2),
            k3: self.k3.or(base.k3),
            k4_convention: self.k4_convention.or(base.k4_convention),
            k4: self.k4.or(base.k4),
            t: self.t.or(base.t),
            t_min: self.t_min.or(base.t_min),
            t_max: self.t_max.or(base.t_max),
            t_steps: self.t_steps.or(base.t_steps),
            grid_r: self.grid_r.or(base.grid_r),
            grid_theta: self.grid_theta.or(base.grid_theta),
            tol: self.tol.or(base.tol),
            seed: self.seed.or(base.seed),
            probes: self.probes.or(base.probes),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
            degrees: self.degrees || base.degrees,
        }
    }
}

/// Fully resolved run settings; angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4_convention: K4Convention,
    pub k4: f64,
    pub t: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
    pub grid_r: usize,
    pub grid_theta: usize,
    pub tol: f64,
    pub seed: u64,
    pub probes: usize,
    pub format: Format,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub const MIN_GRID: usize = 16;

/// Rejected configuration; reported as a usage error.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

pub fn load_file(path: &Path) -> Result<Flags, UsageError> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| UsageError(format!("invalid config {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(command: Command, flags: Flags, file: Option<Flags>) -> Result<Self, UsageError> {
        let f = flags.over(file.unwrap_or_default());
        let angle = |v: f64| if f.degrees { v.to_radians() } else { v };
        let convention: K4Convention = f.k4_convention.unwrap_or(Convention::MinusK2).into();
        let k = FrankConstants::new(
            f.k1.unwrap_or(1.0),
            f.k2.unwrap_or(1.0),
            f.k3.unwrap_or(1.0),
            convention,
            f.k4,
        )
        .or_else(|e| usage(e.to_string()))?;
        if f.k4.is_some() && convention != K4Convention::Explicit {
            return usage("--k4 is only meaningful with --k4-convention explicit");
        }
        let default_format = match command {
            Command::Solve | Command::Sweep => Format::Csv,
            _ => Format::Json,
        };
        let cfg = RunConfig {
            command,
            k1: k.k1,
            k2: k.k2,
            k3: k.k3,
            k4_convention: k.convention,
            k4: k.k4,
            t: f.t.map(angle).unwrap_or(PI / 2.0),
            t_min: f.t_min.map(angle).unwrap_or(0.2),
            t_max: f.t_max.map(angle).unwrap_or(PI - 0.2),
            t_steps: f.t_steps.unwrap_or(16),
            grid_r: f.grid_r.unwrap_or(16),
            grid_theta: f.grid_theta.unwrap_or(256),
            tol: f.tol.unwrap_or(frank_defect::profile::DEFAULT_TOL),
            seed: f.seed.unwrap_or(0),
            probes: f.probes.unwrap_or(20),
            format: f.format.unwrap_or(default_format),
            out: f.out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), UsageError> {
        if !(self.tol > 0.0) {
            return usage(format!("tolerance must be positive, got {}", self.tol));
        }
        if !(1e-14..=1e-6).contains(&self.tol) {
            return usage(format!("tolerance {} outside [1e-14, 1e-6]", self.tol));
        }
        if self.grid_r < MIN_GRID || self.grid_theta < MIN_GRID {
            return usage(format!(
                "grid sizes must be at least {MIN_GRID} per axis, got {} x {}",
                self.grid_r, self.grid_theta
            ));
        }
        match self.command {
            Command::Sweep => {
                if !(self.t_min > 0.0 && self.t_max < PI && self.t_min < self.t_max) {
                    return usage(format!(
                        "sweep range [{}, {}] must satisfy 0 < t-min < t-max < pi",
                        self.t_min, self.t_max
                    ));
                }
                if self.t_steps < 2 {
                    return usage("--t-steps must be at least 2");
                }
            }
            _ => {
                if !(self.t > 0.0 && self.t < PI) {
                    return usage(format!("t = {} must lie in (0, pi)", self.t));
                }
            }
        }
        if matches!(self.command, Command::Probe | Command::Verify) && self.probes == 0 {
            return usage("--probes must be positive");
        }
        if self.format == Format::Svg && self.command != Command::Solve {
            return usage("svg output is only available for solve");
        }
        Ok(())
    }

    /// Evenly spaced sweep values, endpoints included.
    pub fn sweep_values(&self) -> Vec<f64> {
        let n = self.t_steps;
        (0..n)
            .map(|i| self.t_min + (self.t_max - self.t_min) * i as f64 / (n - 1) as f64)
            .collect()
    }
}
