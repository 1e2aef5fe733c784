//! Run configuration: one JSON document, optionally overridden by flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinchain::experiments::Grid;
use spinchain::gates::ConventionChoice;
use spinchain::scenario::Scenario;

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Physical scenario. Absent means the command's own preset: the design
    /// point for `design`, the CNOT reference for everything else.
    pub scenario: Option<Scenario>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    /// Integrator step bound override.
    pub step: Option<f64>,
    /// `paper`, `spectrum` or `auto`.
    pub convention: Option<String>,
    pub trace: TraceOptions,
    pub sweep: SweepOptions,
    pub scan: ScanOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceOptions {
    pub samples: usize,
    pub tau: Option<f64>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            samples: 201,
            tau: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOptions {
    pub rabi: SweepOverrides,
    pub separation: SweepOverrides,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOverrides {
    pub grid: Option<Grid>,
    pub f_values: Option<Vec<f64>>,
    pub b0_values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanOptions {
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub steps: usize,
    /// Scan a lone spin around its Larmor frequency instead of the CNOT line.
    pub single_qubit: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            omega_min: None,
            omega_max: None,
            steps: 81,
            single_qubit: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(s) = &self.scenario {
            s.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(h) = self.step {
            if !(h.is_finite() && h > 0.0) {
                return Err(CliError::Config(format!("step must be positive, got {h}")));
            }
        }
        self.convention_choice()?;
        if self.trace.samples < 2 {
            return Err(CliError::Config("trace.samples must be at least 2".into()));
        }
        if self.scan.steps < 2 {
            return Err(CliError::Config("scan.steps must be at least 2".into()));
        }
        Ok(())
    }

    pub fn convention_choice(&self) -> Result<ConventionChoice, CliError> {
        match &self.convention {
            None => Ok(ConventionChoice::Auto),
            Some(s) => s
                .parse()
                .map_err(|e: spinchain::SpinChainError| CliError::Config(e.to_string())),
        }
    }

    pub fn scenario_or(&self, preset: Scenario) -> Scenario {
        self.scenario.clone().unwrap_or(preset)
    }

    /// Output directory: explicit value, else `SPINCHAIN_OUT`, else `.`.
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os("SPINCHAIN_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }
}
