//! Run configuration shared by the `spectrum` and `sweep` commands.

use std::path::PathBuf;

use cbs_core::atom::AtomDriveParams;
use cbs_core::disorder::{ConfigSampler, MIN_SAMPLES};
use cbs_core::spectra::{default_grid, DEFAULT_GRID_POINTS};
use clap::ValueEnum;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Analytic,
    PumpProbe,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::PumpProbe => "pump-probe",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub rabi: f64,
    pub detuning: f64,
    pub nu_min: f64,
    pub nu_max: f64,
    pub nu_points: usize,
    pub method: Method,
    pub x0: f64,
    pub m: usize,
    pub samples: usize,
    pub seed: u64,
    pub output: PathBuf,
    pub format: Format,
}

impl RunConfig {
    /// Frequency window used when the range is not given explicitly.
    pub fn default_range(rabi: f64) -> (f64, f64, usize) {
        let g = default_grid(&AtomDriveParams::new(rabi, 0.0));
        (g[0], g[g.len() - 1], DEFAULT_GRID_POINTS)
    }

    pub fn params(&self) -> AtomDriveParams {
        AtomDriveParams::new(self.rabi, self.detuning)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        if !(self.rabi.is_finite() && self.detuning.is_finite()) {
            return bad("rabi and detuning must be finite".into());
        }
        if self.rabi <= 0.0 {
            return bad("rabi must be positive".into());
        }
        if !(self.nu_min.is_finite() && self.nu_max.is_finite()) || self.nu_min >= self.nu_max {
            return bad(format!("need nu_min < nu_max, got {} and {}", self.nu_min, self.nu_max));
        }
        if self.nu_points < 3 {
            return bad(format!("nu_points must be at least 3, got {}", self.nu_points));
        }
        if self.method == Method::Oracle {
            if self.samples < MIN_SAMPLES {
                return bad(format!("oracle needs at least {MIN_SAMPLES} samples, got {}", self.samples));
            }
            self.sampler()?;
        }
        Ok(())
    }

    pub fn sampler(&self) -> Result<ConfigSampler, CliError> {
        ConfigSampler::new(self.x0, self.m, self.samples, self.seed).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.nu_points;
        (0..n)
            .map(|k| self.nu_min + (self.nu_max - self.nu_min) * k as f64 / (n - 1) as f64)
            .collect()
    }

    /// `key=value` lines echoed into every output file.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("rabi".into(), num(self.rabi)),
            ("detuning".into(), num(self.detuning)),
            ("nu_min".into(), num(self.nu_min)),
            ("nu_max".into(), num(self.nu_max)),
            ("nu_points".into(), self.nu_points.to_string()),
            ("method".into(), self.method.name().into()),
            ("seed".into(), self.seed.to_string()),
        ];
        if self.method == Method::Oracle {
            v.push(("x0".into(), num(self.x0)));
            v.push(("m".into(), self.m.to_string()));
            v.push(("samples".into(), self.samples.to_string()));
        }
        v
    }
}

/// 17 significant digits, round-trip exact.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}
