use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use spinchain::dynamics::PulseSpec;
use spinchain::experiments::{self, SweepRows, SweepSpec, TraceSpec, CNOT_TRACE_CSV};
use spinchain::gates::{self, Calibration, ConventionChoice};
use spinchain::integrator::IntegratorConfig;
use spinchain::physics::design_report;
use spinchain::scenario::Scenario;
use spinchain::spectrum::BasisState;

use crate::config::{RunConfig, SweepOverrides};
use crate::CliError;

pub const DESIGN_REPORT_JSON: &str = "design_report.json";

/// Half-width of the default scan window around ω₁.
const SCAN_HALF_WIDTH: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Rabi,
    Separation,
}

fn integrator(config: &RunConfig) -> IntegratorConfig {
    IntegratorConfig {
        step: config.step,
        ..IntegratorConfig::default()
    }
}

fn label(s: &str) -> BasisState {
    BasisState::from_label(s).expect("static label")
}

fn prepare_out(config: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = config.out_dir();
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<(), CliError> {
    let file = File::create(path)?;
    serde_json::to_writer_pretty(file, value).map_err(|e| CliError::Config(e.to_string()))
}

pub fn cmd_design(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let scenario = config.scenario_or(Scenario::design());
    let mut report = design_report(&scenario.physical, scenario.n_qubits)?;
    if scenario.n_qubits == 2 {
        let chain = scenario.chain()?;
        let rabi = scenario.rabi();
        if chain.j1 != 0.0 && rabi > 0.0 {
            let convention = gates::resolve_convention(
                config.convention_choice()?,
                &chain,
                rabi,
                &integrator(config),
            )?;
            report.cnot_convention = Some(convention.label().to_string());
        }
    }
    let dir = prepare_out(config)?;
    write_json(&dir.join(DESIGN_REPORT_JSON), &report)?;
    let text =
        serde_json::to_string_pretty(&report).map_err(|e| CliError::Config(e.to_string()))?;
    writeln!(stdout, "{text}")?;
    Ok(())
}

#[derive(Serialize)]
struct TraceSidecar<'a> {
    convention: &'a str,
    calibration: Option<Calibration>,
    pulse: PulseSpec,
    fidelity: f64,
    samples: usize,
    integrator: IntegratorConfig,
    scenario: &'a Scenario,
    code_version: &'static str,
}

pub fn cmd_trace(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let spec = TraceSpec {
        scenario: config.scenario_or(Scenario::cnot_reference()),
        convention: config.convention_choice()?,
        samples: config.trace.samples,
        tau: config.trace.tau,
        integrator: integrator(config),
    };
    let result = experiments::trace_cnot(&spec)?;
    let dir = prepare_out(config)?;
    let csv_path = dir.join(CNOT_TRACE_CSV);
    result.trace.write_csv(File::create(&csv_path)?)?;
    write_json(
        &csv_path.with_extension("json"),
        &TraceSidecar {
            convention: result.convention.label(),
            calibration: result.calibration,
            pulse: result.pulse,
            fidelity: result.fidelity,
            samples: spec.samples,
            integrator: spec.integrator,
            scenario: &spec.scenario,
            code_version: env!("CARGO_PKG_VERSION"),
        },
    )?;
    writeln!(stdout, "convention: {}", result.convention)?;
    writeln!(
        stdout,
        "pulse: omega = {}, rabi = {}, tau = {}",
        result.pulse.omega, result.pulse.rabi, result.pulse.tau
    )?;
    writeln!(
        stdout,
        "final fidelity F(|10> -> |11>) = {:.6}",
        result.fidelity
    )?;
    writeln!(stdout, "wrote {}", csv_path.display())?;
    Ok(())
}

fn apply_overrides(spec: &mut SweepSpec, o: &SweepOverrides) {
    if let Some(g) = &o.grid {
        spec.grid = g.clone();
    }
    if let Some(f) = &o.f_values {
        spec.f_values = f.clone();
    }
    if let Some(b) = &o.b0_values {
        spec.b0_values = b.clone();
    }
}

pub fn sweep_spec(config: &RunConfig, kind: SweepKind) -> Result<SweepSpec, CliError> {
    let (mut spec, overrides) = match kind {
        SweepKind::Rabi => (SweepSpec::rabi_default(), &config.sweep.rabi),
        SweepKind::Separation => (SweepSpec::separation_default(), &config.sweep.separation),
    };
    if let Some(s) = &config.scenario {
        spec.scenario = s.clone();
    }
    apply_overrides(&mut spec, overrides);
    spec.convention = config.convention_choice()?;
    spec.integrator = integrator(config);
    Ok(spec)
}

pub fn cmd_sweep(
    config: &RunConfig,
    kind: SweepKind,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let spec = sweep_spec(config, kind)?;
    let result = experiments::run_sweep(&spec)?;
    let path = result.write_to_dir(&prepare_out(config)?)?;
    writeln!(
        stdout,
        "{} rows, convention {}",
        result.rows.len(),
        result.metadata.convention.as_deref().unwrap_or("n/a")
    )?;
    match &result.rows {
        SweepRows::Rabi(rows) => {
            for &b0 in &spec.b0_values {
                for &f in &spec.f_values {
                    let best = rows
                        .iter()
                        .filter(|r| r.b0_tesla == b0 && r.f == f)
                        .max_by(|a, b| a.fidelity.total_cmp(&b.fidelity));
                    if let Some(r) = best {
                        writeln!(
                            stdout,
                            "B0 = {b0} T, f = {f}: max F = {:.6} at Omega = {}",
                            r.fidelity, r.omega_rabi_w0
                        )?;
                    }
                }
            }
        }
        SweepRows::Separation(rows) => {
            let fs: Vec<f64> = rows.iter().map(|r| r.fidelity).collect();
            let min = fs.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = fs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            writeln!(stdout, "fidelity range [{min:.6}, {max:.6}]")?;
        }
        SweepRows::Drive(_) => {}
    }
    writeln!(stdout, "wrote {}", path.display())?;
    Ok(())
}

pub fn cmd_scan(config: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut scenario = config.scenario_or(Scenario::cnot_reference());
    let (initial, target) = if config.scan.single_qubit {
        scenario.n_qubits = 1;
        (label("0"), label("1"))
    } else {
        if scenario.n_qubits != 2 {
            return Err(CliError::Config(
                "the CNOT scan needs a two-qubit scenario".into(),
            ));
        }
        (label("10"), label("11"))
    };
    let omega1 = scenario.omega1();
    let omega_min = config.scan.omega_min.unwrap_or(omega1 - SCAN_HALF_WIDTH);
    let omega_max = config.scan.omega_max.unwrap_or(omega1 + SCAN_HALF_WIDTH);
    if !(omega_max > omega_min) {
        return Err(CliError::Config(format!(
            "empty scan range [{omega_min}, {omega_max}]"
        )));
    }
    let scan = experiments::scan_scenario(
        &scenario,
        omega_min,
        omega_max,
        config.scan.steps,
        initial,
        target,
        &integrator(config),
    )?;
    writeln!(stdout, "omega\tfidelity")?;
    for (w, f) in &scan.points {
        writeln!(stdout, "{w:.6}\t{f:.6}")?;
    }
    writeln!(
        stdout,
        "argmax omega = {:.6} (F = {:.6}, grid step {:.6})",
        scan.argmax, scan.max_fidelity, scan.grid_step
    )?;
    if config.scan.single_qubit {
        writeln!(stdout, "larmor omega_1 = {omega1:.6}")?;
    } else {
        let chain = scenario.chain()?;
        let matched = gates::matching_convention(&chain, scan.argmax, scan.grid_step);
        writeln!(
            stdout,
            "matching convention: {}",
            matched.map(|c| c.label()).unwrap_or("none")
        )?;
        if let ConventionChoice::Fixed(c) = config.convention_choice()? {
            writeln!(
                stdout,
                "requested convention {} at omega = {:.6}",
                c,
                c.frequency(&chain)?
            )?;
        }
    }
    Ok(())
}
