//! Sweeps and traces over the two-qubit CNOT.
//!
//! Grid points are independent and evaluated on the current rayon pool;
//! rows always come back in grid order, so output files are reproducible
//! bit for bit for a given spec.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_with, PulseSpec, StateVector, TraceRecord, PHASE_PER_STEP};
use crate::error::{Result, SpinChainError};
use crate::gates::{
    self, calibrate_convention, Calibration, CnotConvention, ConventionChoice, ScanResult, ScanSpec,
};
use crate::integrator::IntegratorConfig;
use crate::physics::{self, PhysicalParams};
use crate::scenario::Scenario;
use crate::spectrum::BasisState;

pub const RABI_SWEEP_CSV: &str = "rabi_sweep.csv";
pub const SEPARATION_SWEEP_CSV: &str = "separation_sweep.csv";
pub const DRIVE_SWEEP_CSV: &str = "drive_sweep.csv";
pub const CNOT_TRACE_CSV: &str = "cnot_trace.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParameter {
    /// Rabi frequency Ω, one π-pulse per point.
    Rabi,
    /// Separation factor ξ.
    Xi,
    /// Drive frequency ω.
    Omega,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Range { min: f64, max: f64, count: usize },
    List(Vec<f64>),
}

impl Grid {
    /// Grid values; at least two, strictly increasing.
    pub fn values(&self) -> Result<Vec<f64>> {
        let values: Vec<f64> = match self {
            Grid::Range { min, max, count } => {
                if *count < 2 {
                    return Err(SpinChainError::Sweep(format!(
                        "grid needs at least 2 points, got {count}"
                    )));
                }
                (0..*count)
                    .map(|i| min + (max - min) * i as f64 / (*count - 1) as f64)
                    .collect()
            }
            Grid::List(v) => v.clone(),
        };
        if values.len() < 2 {
            return Err(SpinChainError::Sweep("grid needs at least 2 points".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(SpinChainError::Sweep(
                "grid must be finite and strictly increasing".into(),
            ));
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweptParameter,
    pub grid: Grid,
    pub scenario: Scenario,
    /// Relative Larmor offsets; the Rabi sweep produces one curve per
    /// (B₀, f) pair, the other sweeps use the first entry.
    pub f_values: Vec<f64>,
    /// Longitudinal fields in tesla.
    pub b0_values: Vec<f64>,
    pub initial: BasisState,
    pub ideal: BasisState,
    #[serde(default)]
    pub convention: ConventionChoice,
    #[serde(default)]
    pub integrator: IntegratorConfig,
}

fn two_qubit(label: &str) -> BasisState {
    BasisState::from_label(label).expect("static label")
}

impl SweepSpec {
    /// F(Ω) for B₀ ∈ {0.1, 0.5} T and f ∈ {0.01, 0.05, 0.1, 0.2}, Ω ∈ [0.02, 0.5].
    pub fn rabi_default() -> Self {
        SweepSpec {
            parameter: SweptParameter::Rabi,
            grid: Grid::Range {
                min: 0.02,
                max: 0.5,
                count: 100,
            },
            scenario: Scenario::cnot_reference(),
            f_values: vec![0.01, 0.05, 0.1, 0.2],
            b0_values: vec![0.1, 0.5],
            initial: two_qubit("10"),
            ideal: two_qubit("11"),
            convention: ConventionChoice::Auto,
            integrator: IntegratorConfig::default(),
        }
    }

    /// F(ξ) for ξ ∈ [1, 4] at f = 0.05, B₀ = 0.5 T.
    pub fn separation_default() -> Self {
        SweepSpec {
            parameter: SweptParameter::Xi,
            grid: Grid::Range {
                min: 1.0,
                max: 4.0,
                count: 31,
            },
            f_values: vec![0.05],
            b0_values: vec![0.5],
            ..SweepSpec::rabi_default()
        }
    }

    /// F(ω) around the two candidate CNOT frequencies.
    pub fn drive_default() -> Self {
        SweepSpec {
            parameter: SweptParameter::Omega,
            grid: Grid::Range {
                min: 21.1,
                max: 21.5,
                count: 81,
            },
            f_values: vec![0.05],
            b0_values: vec![0.5],
            ..SweepSpec::rabi_default()
        }
    }

    fn base_scenario(&self) -> Result<Scenario> {
        let f = *self
            .f_values
            .first()
            .ok_or_else(|| SpinChainError::Sweep("f_values is empty".into()))?;
        let b0 = *self
            .b0_values
            .first()
            .ok_or_else(|| SpinChainError::Sweep("b0_values is empty".into()))?;
        Ok(with_fields(&self.scenario, b0, f))
    }
}

/// Scenario with B₀ and f replaced; an ω₁ override is dropped so that B₀
/// takes effect.
fn with_fields(scenario: &Scenario, b0: f64, f: f64) -> Scenario {
    Scenario {
        physical: PhysicalParams {
            b0,
            f,
            ..scenario.physical
        },
        omega1: None,
        ..scenario.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RabiRow {
    pub b0_tesla: f64,
    pub f: f64,
    pub omega_rabi_w0: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationRow {
    pub xi: f64,
    pub j_w0: f64,
    pub gradient_t_per_m: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriveRow {
    pub omega_drive_w0: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepRows {
    Rabi(Vec<RabiRow>),
    Separation(Vec<SeparationRow>),
    Drive(Vec<DriveRow>),
}

impl SweepRows {
    pub fn len(&self) -> usize {
        match self {
            SweepRows::Rabi(r) => r.len(),
            SweepRows::Separation(r) => r.len(),
            SweepRows::Drive(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn fidelities(&self) -> Vec<f64> {
        match self {
            SweepRows::Rabi(r) => r.iter().map(|x| x.fidelity).collect(),
            SweepRows::Separation(r) => r.iter().map(|x| x.fidelity).collect(),
            SweepRows::Drive(r) => r.iter().map(|x| x.fidelity).collect(),
        }
    }
}

/// Run description written next to every CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepMetadata {
    pub parameter: SweptParameter,
    pub rows: usize,
    /// Convention label, absent for drive-frequency sweeps.
    pub convention: Option<String>,
    pub calibration: Option<Calibration>,
    pub integrator: IntegratorConfig,
    pub step_rule: String,
    pub initial: BasisState,
    pub ideal: BasisState,
    pub scenario: Scenario,
    pub code_version: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: SweepRows,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn default_file_name(&self) -> &'static str {
        match self.rows {
            SweepRows::Rabi(_) => RABI_SWEEP_CSV,
            SweepRows::Separation(_) => SEPARATION_SWEEP_CSV,
            SweepRows::Drive(_) => DRIVE_SWEEP_CSV,
        }
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        match &self.rows {
            SweepRows::Rabi(rows) => rows.iter().try_for_each(|r| w.serialize(r))?,
            SweepRows::Separation(rows) => rows.iter().try_for_each(|r| w.serialize(r))?,
            SweepRows::Drive(rows) => rows.iter().try_for_each(|r| w.serialize(r))?,
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_metadata<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, &self.metadata)
            .map_err(|e| SpinChainError::Io(e.to_string()))
    }

    /// Writes `<dir>/<name>.csv` and `<dir>/<name>.json`; returns the CSV path.
    pub fn write_to_dir(&self, dir: &Path) -> Result<std::path::PathBuf> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(self.default_file_name());
        self.write_csv(std::fs::File::create(&csv_path)?)?;
        self.write_metadata(std::fs::File::create(csv_path.with_extension("json"))?)?;
        Ok(csv_path)
    }
}

fn step_rule(config: &IntegratorConfig) -> String {
    match config.step {
        Some(h) => format!("fixed step bound h = {h}"),
        None => format!("h = {PHASE_PER_STEP} / max(max omega_j, |omega|, Omega, max |detuning|)"),
    }
}

fn metadata(
    spec: &SweepSpec,
    rows: usize,
    calibration: Option<Calibration>,
    convention: Option<CnotConvention>,
) -> SweepMetadata {
    SweepMetadata {
        parameter: spec.parameter,
        rows,
        convention: convention.map(|c| c.label().to_string()),
        calibration,
        integrator: spec.integrator,
        step_rule: step_rule(&spec.integrator),
        initial: spec.initial,
        ideal: spec.ideal,
        scenario: spec.scenario.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// Resolve the CNOT convention once per sweep, calibrating on `base`.
fn sweep_convention(
    spec: &SweepSpec,
    base: &Scenario,
) -> Result<(CnotConvention, Option<Calibration>)> {
    match spec.convention {
        ConventionChoice::Fixed(c) => Ok((c, None)),
        ConventionChoice::Auto => {
            let cal = calibrate_convention(&base.chain()?, base.rabi(), &spec.integrator)?;
            Ok((cal.chosen, Some(cal)))
        }
    }
}

/// F at the end of a CNOT π-pulse for one scenario and Rabi frequency.
fn cnot_fidelity(
    spec: &SweepSpec,
    scenario: &Scenario,
    convention: CnotConvention,
    rabi: f64,
) -> Result<f64> {
    let chain = scenario.chain()?;
    let pulse = gates::cnot_pulse(&chain, convention, rabi)?;
    Ok(gates::run_gate(&chain, &pulse, spec.initial, spec.ideal, &spec.integrator)?.fidelity)
}

fn expect_parameter(spec: &SweepSpec, p: SweptParameter) -> Result<()> {
    if spec.parameter != p {
        return Err(SpinChainError::Sweep(format!(
            "expected a {p:?} sweep, got {:?}",
            spec.parameter
        )));
    }
    Ok(())
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    match spec.parameter {
        SweptParameter::Rabi => sweep_rabi(spec),
        SweptParameter::Xi => sweep_separation(spec),
        SweptParameter::Omega => sweep_drive(spec),
    }
}

/// Fidelity against Ω for every (B₀, f) pair, each point a fresh π-pulse.
pub fn sweep_rabi(spec: &SweepSpec) -> Result<SweepResult> {
    expect_parameter(spec, SweptParameter::Rabi)?;
    let grid = spec.grid.values()?;
    if grid[0] <= 0.0 {
        return Err(SpinChainError::Sweep("Rabi grid must be positive".into()));
    }
    if spec.f_values.is_empty() || spec.b0_values.is_empty() {
        return Err(SpinChainError::Sweep(
            "f_values and b0_values must be non-empty".into(),
        ));
    }
    let (convention, calibration) = sweep_convention(spec, &spec.scenario)?;
    let mut points = Vec::with_capacity(spec.b0_values.len() * spec.f_values.len() * grid.len());
    for &b0 in &spec.b0_values {
        for &f in &spec.f_values {
            points.extend(grid.iter().map(|&rabi| (b0, f, rabi)));
        }
    }
    let rows = points
        .into_par_iter()
        .map(|(b0, f, rabi)| {
            let scenario = with_fields(&spec.scenario, b0, f);
            let fidelity = cnot_fidelity(spec, &scenario, convention, rabi)?;
            Ok(RabiRow {
                b0_tesla: b0,
                f,
                omega_rabi_w0: rabi,
                fidelity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let metadata = metadata(spec, rows.len(), calibration, Some(convention));
    Ok(SweepResult {
        rows: SweepRows::Rabi(rows),
        metadata,
    })
}

/// J, field gradient and fidelity against ξ with fields held fixed.
pub fn sweep_separation(spec: &SweepSpec) -> Result<SweepResult> {
    expect_parameter(spec, SweptParameter::Xi)?;
    let grid = spec.grid.values()?;
    let base = spec.base_scenario()?;
    let (convention, calibration) = sweep_convention(spec, &base)?;
    let rabi = base.rabi();
    let rows = grid
        .into_par_iter()
        .map(|xi| {
            let physical = PhysicalParams {
                xi,
                ..base.physical
            };
            let scenario = Scenario {
                physical,
                j1: None,
                ..base.clone()
            };
            Ok(SeparationRow {
                xi,
                j_w0: physics::coupling_constant(&physical)?,
                gradient_t_per_m: physics::field_gradient(&physical)?,
                fidelity: cnot_fidelity(spec, &scenario, convention, rabi)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let metadata = metadata(spec, rows.len(), calibration, Some(convention));
    Ok(SweepResult {
        rows: SweepRows::Separation(rows),
        metadata,
    })
}

/// Fidelity against drive frequency; a thin wrapper over the resonance scan.
pub fn sweep_drive(spec: &SweepSpec) -> Result<SweepResult> {
    expect_parameter(spec, SweptParameter::Omega)?;
    let grid = spec.grid.values()?;
    let base = spec.base_scenario()?;
    let chain = base.chain()?;
    let rabi = base.rabi();
    if !(rabi > 0.0) {
        return Err(SpinChainError::domain("rabi", "a π-pulse needs Ω > 0"));
    }
    let rows = grid
        .into_par_iter()
        .map(|omega| {
            let pulse = PulseSpec::pi_pulse(omega, rabi);
            let fidelity =
                gates::run_gate(&chain, &pulse, spec.initial, spec.ideal, &spec.integrator)?
                    .fidelity;
            Ok(DriveRow {
                omega_drive_w0: omega,
                fidelity,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let metadata = metadata(spec, rows.len(), None, None);
    Ok(SweepResult {
        rows: SweepRows::Drive(rows),
        metadata,
    })
}

/// Resonance scan on a scenario's chain with its Rabi frequency.
pub fn scan_scenario(
    scenario: &Scenario,
    omega_min: f64,
    omega_max: f64,
    steps: usize,
    initial: BasisState,
    target: BasisState,
    config: &IntegratorConfig,
) -> Result<ScanResult> {
    let chain = scenario.chain()?;
    let spec = ScanSpec {
        omega_min,
        omega_max,
        steps,
        rabi: scenario.rabi(),
        phase: 0.0,
        initial,
        target,
    };
    gates::resonance_scan(&chain, &spec, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSpec {
    pub scenario: Scenario,
    pub convention: ConventionChoice,
    pub samples: usize,
    /// Duration; defaults to π/Ω.
    pub tau: Option<f64>,
    pub integrator: IntegratorConfig,
}

impl Default for TraceSpec {
    fn default() -> Self {
        TraceSpec {
            scenario: Scenario::cnot_reference(),
            convention: ConventionChoice::Auto,
            samples: 201,
            tau: None,
            integrator: IntegratorConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CnotTrace {
    pub trace: TraceRecord,
    pub pulse: PulseSpec,
    pub convention: CnotConvention,
    pub calibration: Option<Calibration>,
    /// |a_11|² at the end of the pulse.
    pub fidelity: f64,
}

/// Populations of all four states over one CNOT pulse starting from |10⟩.
pub fn trace_cnot(spec: &TraceSpec) -> Result<CnotTrace> {
    if spec.scenario.n_qubits != 2 {
        return Err(SpinChainError::CnotPrecondition("exactly two qubits"));
    }
    let chain = spec.scenario.chain()?;
    let rabi = spec.scenario.rabi();
    let tau = match spec.tau {
        Some(t) => t,
        None if rabi > 0.0 => std::f64::consts::PI / rabi,
        None => {
            return Err(SpinChainError::domain(
                "tau",
                "required when the Rabi frequency is zero",
            ))
        }
    };
    let (convention, calibration) = match spec.convention {
        ConventionChoice::Fixed(c) => (c, None),
        // Without a drive there is nothing to calibrate.
        ConventionChoice::Auto if rabi == 0.0 => (CnotConvention::SpectrumGap, None),
        ConventionChoice::Auto => {
            let cal = calibrate_convention(&chain, rabi, &spec.integrator)?;
            (cal.chosen, Some(cal))
        }
    };
    let pulse = PulseSpec {
        omega: convention.frequency(&chain)?,
        phase: 0.0,
        rabi,
        tau,
    };
    let initial = StateVector::basis(two_qubit("10"));
    let out = evolve_with(
        &chain,
        &pulse,
        &initial,
        Some(spec.samples),
        &spec.integrator,
    )?;
    let fidelity = out.state.population(two_qubit("11"));
    let trace = out.trace.expect("samples requested");
    Ok(CnotTrace {
        trace,
        pulse,
        convention,
        calibration,
        fidelity,
    })
}
