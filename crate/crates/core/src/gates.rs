//! Gate protocols built from single rectangular pulses: rotations and NOT on
//! one spin, the frequency-selective CNOT on two, fidelity and resonance
//! scans.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_with, PulseSpec, StateVector};
use crate::error::{Result, SpinChainError};
use crate::integrator::IntegratorConfig;
use crate::spectrum::{transition_frequency, BasisState, ChainSpec};

/// Choice of drive frequency for the |10⟩ ↔ |11⟩ CNOT transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CnotConvention {
    /// ω = ω₁ − J/2.
    #[serde(rename = "paper")]
    LarmorMinusHalfJ,
    /// ω = E(11) − E(10) = ω₁ + J/2 from the diagonal spectrum.
    #[serde(rename = "spectrum")]
    SpectrumGap,
}

impl CnotConvention {
    pub const ALL: [CnotConvention; 2] = [
        CnotConvention::LarmorMinusHalfJ,
        CnotConvention::SpectrumGap,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CnotConvention::LarmorMinusHalfJ => "paper",
            CnotConvention::SpectrumGap => "spectrum",
        }
    }

    /// Drive frequency this convention assigns to the CNOT.
    pub fn frequency(&self, chain: &ChainSpec) -> Result<f64> {
        check_cnot_chain(chain)?;
        match self {
            CnotConvention::LarmorMinusHalfJ => Ok(chain.omega[0] - chain.j1 / 2.0),
            CnotConvention::SpectrumGap => {
                transition_frequency(BasisState::new(0b10, 2)?, BasisState::new(0b11, 2)?, chain)
            }
        }
    }
}

impl fmt::Display for CnotConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A fixed convention or calibration at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ConventionChoice {
    Fixed(CnotConvention),
    #[default]
    Auto,
}

impl FromStr for ConventionChoice {
    type Err = SpinChainError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(ConventionChoice::Fixed(CnotConvention::LarmorMinusHalfJ)),
            "spectrum" => Ok(ConventionChoice::Fixed(CnotConvention::SpectrumGap)),
            "auto" => Ok(ConventionChoice::Auto),
            other => Err(SpinChainError::domain(
                "convention",
                format!("expected paper|spectrum|auto, got {other:?}"),
            )),
        }
    }
}

fn check_cnot_chain(chain: &ChainSpec) -> Result<()> {
    if chain.n() != 2 {
        return Err(SpinChainError::CnotPrecondition("exactly two qubits"));
    }
    if chain.j1 == 0.0 {
        return Err(SpinChainError::CnotPrecondition("a non-zero coupling J"));
    }
    Ok(())
}

fn check_rabi(rabi: f64) -> Result<()> {
    if rabi.is_finite() && rabi > 0.0 {
        Ok(())
    } else {
        Err(SpinChainError::domain(
            "rabi",
            format!("a π-pulse needs Ω > 0, got {rabi}"),
        ))
    }
}

/// Rotation of `qubit` (1-based) by `angle`: resonant with its bare Larmor
/// frequency, duration angle/Ω.
pub fn rotation_pulse(chain: &ChainSpec, qubit: usize, rabi: f64, angle: f64) -> Result<PulseSpec> {
    if qubit == 0 || qubit > chain.n() {
        return Err(SpinChainError::QubitOutOfRange {
            qubit,
            n: chain.n(),
        });
    }
    check_rabi(rabi)?;
    Ok(PulseSpec {
        omega: chain.omega[qubit - 1],
        phase: 0.0,
        rabi,
        tau: angle / rabi,
    })
}

/// π rotation of `qubit`.
pub fn not_pulse(chain: &ChainSpec, qubit: usize, rabi: f64) -> Result<PulseSpec> {
    rotation_pulse(chain, qubit, rabi, std::f64::consts::PI)
}

/// π-pulse on the |10⟩ ↔ |11⟩ transition (site 2 controls site 1).
pub fn cnot_pulse(chain: &ChainSpec, convention: CnotConvention, rabi: f64) -> Result<PulseSpec> {
    check_rabi(rabi)?;
    Ok(PulseSpec::pi_pulse(convention.frequency(chain)?, rabi))
}

/// |⟨ideal|real⟩|², clipped to 1 against rounding.
pub fn fidelity(ideal: &StateVector, real: &StateVector) -> f64 {
    ideal.inner(real).norm_sqr().min(1.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct GateOutcome {
    #[serde(skip)]
    pub final_state: StateVector,
    pub fidelity: f64,
    pub pulse_used: PulseSpec,
    pub initial_label: BasisState,
    pub target_label: BasisState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<CnotConvention>,
    pub final_populations: Vec<f64>,
}

impl GateOutcome {
    /// Fidelity recomputed from the stored final state.
    pub fn recompute_fidelity(&self) -> f64 {
        fidelity(&StateVector::basis(self.target_label), &self.final_state)
    }
}

/// Evolve `initial` under `pulse` and score the result against `ideal`.
pub fn run_gate(
    chain: &ChainSpec,
    pulse: &PulseSpec,
    initial: BasisState,
    ideal: BasisState,
    config: &IntegratorConfig,
) -> Result<GateOutcome> {
    let out = evolve_with(chain, pulse, &StateVector::basis(initial), None, config)?;
    let fidelity = fidelity(&StateVector::basis(ideal), &out.state);
    Ok(GateOutcome {
        fidelity,
        pulse_used: *pulse,
        initial_label: initial,
        target_label: ideal,
        convention: None,
        final_populations: out.state.populations(),
        final_state: out.state,
    })
}

/// CNOT from `initial` scored against its truth-table image.
pub fn run_cnot(
    chain: &ChainSpec,
    convention: CnotConvention,
    rabi: f64,
    initial: BasisState,
    config: &IntegratorConfig,
) -> Result<GateOutcome> {
    let pulse = cnot_pulse(chain, convention, rabi)?;
    let mut outcome = run_gate(chain, &pulse, initial, cnot_image(initial), config)?;
    outcome.convention = Some(convention);
    Ok(outcome)
}

/// Ideal CNOT image of a two-qubit basis state (site 2 controls site 1).
pub fn cnot_image(state: BasisState) -> BasisState {
    if state.bit(2) == 1 {
        state.flipped(1)
    } else {
        state
    }
}

/// Fidelities of |10⟩ → |11⟩ under both conventions and the winner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub chosen: CnotConvention,
    pub fidelity_paper: f64,
    pub fidelity_spectrum: f64,
    pub rabi: f64,
}

/// Run the CNOT from |10⟩ with each convention; the higher fidelity wins
/// and ties go to the spectrum gap.
pub fn calibrate_convention(
    chain: &ChainSpec,
    rabi: f64,
    config: &IntegratorConfig,
) -> Result<Calibration> {
    let start = BasisState::new(0b10, 2)?;
    let fidelity_paper =
        run_cnot(chain, CnotConvention::LarmorMinusHalfJ, rabi, start, config)?.fidelity;
    let fidelity_spectrum =
        run_cnot(chain, CnotConvention::SpectrumGap, rabi, start, config)?.fidelity;
    let chosen = if fidelity_paper > fidelity_spectrum {
        CnotConvention::LarmorMinusHalfJ
    } else {
        CnotConvention::SpectrumGap
    };
    Ok(Calibration {
        chosen,
        fidelity_paper,
        fidelity_spectrum,
        rabi,
    })
}

/// Resolve a choice to a concrete convention, calibrating when needed.
pub fn resolve_convention(
    choice: ConventionChoice,
    chain: &ChainSpec,
    rabi: f64,
    config: &IntegratorConfig,
) -> Result<CnotConvention> {
    match choice {
        ConventionChoice::Fixed(c) => Ok(c),
        ConventionChoice::Auto => Ok(calibrate_convention(chain, rabi, config)?.chosen),
    }
}

/// Drive-frequency scan: one π-pulse per grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub steps: usize,
    pub rabi: f64,
    #[serde(default)]
    pub phase: f64,
    pub initial: BasisState,
    pub target: BasisState,
}

impl ScanSpec {
    pub fn grid(&self) -> Vec<f64> {
        let span = self.omega_max - self.omega_min;
        (0..self.steps)
            .map(|i| self.omega_min + span * i as f64 / (self.steps - 1) as f64)
            .collect()
    }

    pub fn grid_step(&self) -> f64 {
        (self.omega_max - self.omega_min) / (self.steps - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    /// (ω, F) in grid order.
    pub points: Vec<(f64, f64)>,
    pub argmax: f64,
    pub max_fidelity: f64,
    pub grid_step: f64,
}

pub fn resonance_scan(
    chain: &ChainSpec,
    spec: &ScanSpec,
    config: &IntegratorConfig,
) -> Result<ScanResult> {
    if spec.steps < 2 {
        return Err(SpinChainError::domain(
            "steps",
            "a scan needs at least two grid points",
        ));
    }
    if !(spec.omega_max > spec.omega_min)
        || !spec.omega_min.is_finite()
        || !spec.omega_max.is_finite()
    {
        return Err(SpinChainError::domain(
            "omega range",
            format!("empty range [{}, {}]", spec.omega_min, spec.omega_max),
        ));
    }
    check_rabi(spec.rabi)?;
    let points = spec
        .grid()
        .into_par_iter()
        .map(|omega| {
            let pulse = PulseSpec {
                phase: spec.phase,
                ..PulseSpec::pi_pulse(omega, spec.rabi)
            };
            run_gate(chain, &pulse, spec.initial, spec.target, config).map(|o| (omega, o.fidelity))
        })
        .collect::<Result<Vec<_>>>()?;
    let (argmax, max_fidelity) =
        points
            .iter()
            .copied()
            .fold((f64::NAN, f64::NEG_INFINITY), |best, p| {
                if p.1 > best.1 {
                    p
                } else {
                    best
                }
            });
    Ok(ScanResult {
        points,
        argmax,
        max_fidelity,
        grid_step: spec.grid_step(),
    })
}

/// The convention whose frequency lies within `tolerance` of `omega`, if any.
pub fn matching_convention(
    chain: &ChainSpec,
    omega: f64,
    tolerance: f64,
) -> Option<CnotConvention> {
    CnotConvention::ALL
        .into_iter()
        .filter_map(|c| c.frequency(chain).ok().map(|w| (c, (w - omega).abs())))
        .filter(|(_, d)| *d <= tolerance)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(c, _)| c)
}
