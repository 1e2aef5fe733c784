//! Laboratory-frame parameters and their conversion into the dimensionless
//! model, where every frequency is measured in units of the reference
//! angular frequency ω₀ (2π MHz unless configured otherwise).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinChainError};

/// μ₀/4π in T·m/A.
pub const MU0_OVER_4PI: f64 = 1.0e-7;
/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.0546e-34;
/// Proton gyromagnetic ratio in rad/(T·s), used for the ¹³C moment.
pub const PROTON_GAMMA: f64 = 2.675e8;
/// 2π MHz in rad/s.
pub const OMEGA0_DEFAULT: f64 = 2.0 * PI * 1.0e6;
/// Length unit of the separation factor ξ, in meters.
pub const SEPARATION_UNIT_M: f64 = 1.0e-10;

/// Orientation of the chain axis relative to the longitudinal field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Chain perpendicular to the static field (along x).
    #[default]
    XAxis,
    /// Chain parallel to the static field; the dipolar coupling becomes −2J.
    ZAxis,
}

/// Laboratory quantities in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicalParams {
    /// Gyromagnetic ratio, rad/(T·s).
    pub gamma: f64,
    /// Longitudinal field at site 1, T.
    pub b0: f64,
    /// Transverse rf amplitude, T.
    pub b_rf: f64,
    /// Separation factor: a = ξ·10⁻¹⁰ m.
    pub xi: f64,
    /// Relative Larmor offset between adjacent sites.
    pub f: f64,
    pub alignment: Alignment,
    /// Reference angular frequency, rad/s.
    pub omega0: f64,
}

impl Default for PhysicalParams {
    /// The design point: B₀ = 0.5 T, b = 6.08 mT, ξ = 3, f = 0.05.
    fn default() -> Self {
        PhysicalParams {
            gamma: PROTON_GAMMA,
            b0: 0.5,
            b_rf: 0.00608,
            xi: 3.0,
            f: 0.05,
            alignment: Alignment::XAxis,
            omega0: OMEGA0_DEFAULT,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(SpinChainError::domain(
                    name,
                    format!("must be positive, got {v}"),
                ))
            }
        }
        fn non_negative(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(SpinChainError::domain(
                    name,
                    format!("must be non-negative, got {v}"),
                ))
            }
        }
        positive("gamma", self.gamma)?;
        positive("xi", self.xi)?;
        positive("omega0", self.omega0)?;
        non_negative("b0", self.b0)?;
        non_negative("b_rf", self.b_rf)?;
        if !self.f.is_finite() || self.f <= -1.0 {
            return Err(SpinChainError::domain(
                "f",
                format!("must exceed -1, got {}", self.f),
            ));
        }
        Ok(())
    }

    /// Nearest-neighbor separation a in meters.
    pub fn separation(&self) -> f64 {
        self.xi * SEPARATION_UNIT_M
    }
}

/// Dipolar coupling between two spins at distance `a` (meters) along the
/// x axis, as an angular frequency in rad/s.
fn dipolar_coupling_rad_per_s(gamma: f64, a: f64) -> f64 {
    MU0_OVER_4PI * gamma * gamma * HBAR / (a * a * a)
}

/// Nearest-neighbor Ising coupling J in units of ω₀.
pub fn coupling_constant(p: &PhysicalParams) -> Result<f64> {
    if !(p.xi.is_finite() && p.xi > 0.0) {
        return Err(SpinChainError::domain(
            "xi",
            format!("must be positive, got {}", p.xi),
        ));
    }
    p.validate()?;
    let j = dipolar_coupling_rad_per_s(p.gamma, p.separation()) / p.omega0;
    Ok(match p.alignment {
        Alignment::XAxis => j,
        Alignment::ZAxis => -2.0 * j,
    })
}

/// Next-nearest coupling J′: the same dipolar law at distance 2a, i.e. J/8.
pub fn next_nearest_coupling(p: &PhysicalParams) -> Result<f64> {
    Ok(coupling_constant(p)? / 8.0)
}

/// Larmor frequency γB/ω₀ of a spin in field `b` (tesla).
pub fn larmor_frequency(b: f64, p: &PhysicalParams) -> f64 {
    p.gamma * b / p.omega0
}

/// Rabi frequency γb/ω₀ for transverse amplitude `b_rf` (tesla).
pub fn rabi_frequency(b_rf: f64, p: &PhysicalParams) -> f64 {
    p.gamma * b_rf / p.omega0
}

/// Inverse of [`rabi_frequency`]: the rf amplitude in tesla producing `rabi`.
pub fn rf_amplitude(rabi: f64, p: &PhysicalParams) -> f64 {
    rabi * p.omega0 / p.gamma
}

/// Longitudinal field gradient ΔB₀/Δx in T/m needed for the adjacent-site
/// Larmor offset Δω = f·γ·B₀ across the separation a.
pub fn field_gradient(p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    let delta_omega = p.f * p.gamma * p.b0;
    Ok(delta_omega / (p.gamma * p.separation()))
}

/// Larmor ladder ω_j = ω₁(1+f)^(j−1), j = 1..=n, in units of ω₀.
pub fn larmor_ladder(omega1: f64, f: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| omega1 * (1.0 + f).powi(k as i32)).collect()
}

const GRADIENT_NOTE: &str = "gradient_si is f*B0/a evaluated directly; the \
frequently quoted 0.83e6 T/m for xi=3, f=0.05, B0=0.5 T does not follow from \
this relation (it gives ~8.3e7 T/m)";

/// Design parameters of an N-spin chain, in SI (`_si`) and ω₀ (`_w0`) units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignReport {
    pub n_qubits: usize,
    pub alignment: Alignment,
    pub xi: f64,
    pub relative_offset_f: f64,
    pub separation_si: f64,
    pub gamma_si: f64,
    pub omega0_si: f64,
    pub b0_si: f64,
    pub b_rf_si: f64,
    pub gradient_si: f64,
    pub coupling_j_w0: f64,
    pub coupling_j2_w0: f64,
    pub rabi_w0: f64,
    pub larmor_w0: Vec<f64>,
    pub gradient_note: String,
    /// CNOT frequency convention chosen by calibration, when one was run.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cnot_convention: Option<String>,
}

pub fn design_report(p: &PhysicalParams, n_qubits: usize) -> Result<DesignReport> {
    if n_qubits == 0 {
        return Err(SpinChainError::domain("n_qubits", "must be at least 1"));
    }
    p.validate()?;
    let omega1 = larmor_frequency(p.b0, p);
    Ok(DesignReport {
        n_qubits,
        alignment: p.alignment,
        xi: p.xi,
        relative_offset_f: p.f,
        separation_si: p.separation(),
        gamma_si: p.gamma,
        omega0_si: p.omega0,
        b0_si: p.b0,
        b_rf_si: p.b_rf,
        gradient_si: field_gradient(p)?,
        coupling_j_w0: coupling_constant(p)?,
        coupling_j2_w0: next_nearest_coupling(p)?,
        rabi_w0: rabi_frequency(p.b_rf, p),
        larmor_w0: larmor_ladder(omega1, p.f, n_qubits),
        gradient_note: GRADIENT_NOTE.to_string(),
        cnot_convention: None,
    })
}
