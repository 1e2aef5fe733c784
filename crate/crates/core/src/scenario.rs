//! Named parameter sets and the mapping from laboratory parameters (plus
//! optional dimensionless overrides) to a [`ChainSpec`] and Rabi frequency.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinChainError};
use crate::physics::{self, PhysicalParams};
use crate::spectrum::{ChainSpec, MAX_QUBITS};

/// Rabi frequency of the two-qubit CNOT reference run, in units of ω₀.
pub const CNOT_REFERENCE_RABI: f64 = 0.07;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub physical: PhysicalParams,
    pub n_qubits: usize,
    /// Overrides γB₀/ω₀ for site 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega1: Option<f64>,
    /// Overrides the nearest-neighbor coupling derived from ξ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j1: Option<f64>,
    /// Overrides the next-nearest coupling (default J/8 for N ≥ 3, else 0).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j2: Option<f64>,
    /// Overrides γb/ω₀.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rabi: Option<f64>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario::design()
    }
}

impl Scenario {
    /// Design point: ξ = 3, B₀ = 0.5 T, f = 0.05, b = 6.08 mT.
    pub fn design() -> Self {
        Scenario {
            physical: PhysicalParams::default(),
            n_qubits: 2,
            omega1: None,
            j1: None,
            j2: None,
            rabi: None,
        }
    }

    /// Two-qubit CNOT reference: ξ = 1 (J ≈ 0.12), B₀ = 0.5 T (ω₁ ≈ 21.287),
    /// f = 0.05, Ω = [`CNOT_REFERENCE_RABI`].
    pub fn cnot_reference() -> Self {
        Scenario {
            physical: PhysicalParams {
                xi: 1.0,
                ..PhysicalParams::default()
            },
            rabi: Some(CNOT_REFERENCE_RABI),
            ..Scenario::design()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.physical.validate()?;
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(SpinChainError::TooManyQubits {
                n: self.n_qubits,
                cap: MAX_QUBITS,
            });
        }
        if let Some(r) = self.rabi {
            if !(r.is_finite() && r >= 0.0) {
                return Err(SpinChainError::domain(
                    "rabi",
                    format!("must be non-negative, got {r}"),
                ));
            }
        }
        Ok(())
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
            .unwrap_or_else(|| physics::larmor_frequency(self.physical.b0, &self.physical))
    }

    pub fn coupling(&self) -> Result<f64> {
        match self.j1 {
            Some(j) => Ok(j),
            None => physics::coupling_constant(&self.physical),
        }
    }

    pub fn rabi(&self) -> f64 {
        self.rabi
            .unwrap_or_else(|| physics::rabi_frequency(self.physical.b_rf, &self.physical))
    }

    pub fn chain(&self) -> Result<ChainSpec> {
        self.validate()?;
        let j1 = self.coupling()?;
        let j2 = match self.j2 {
            Some(j) => j,
            None if self.n_qubits >= 3 => j1 / 8.0,
            None => 0.0,
        };
        let omega = physics::larmor_ladder(self.omega1(), self.physical.f, self.n_qubits);
        let chain = ChainSpec::new(omega, j1, j2)?;
        chain.log_warnings();
        Ok(chain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cnot_reference_chain() {
        let chain = Scenario::cnot_reference().chain().unwrap();
        assert_relative_eq!(chain.omega[0], 21.287, max_relative = 1e-3);
        assert_relative_eq!(chain.omega[1], 21.287 * 1.05, max_relative = 1e-3);
        assert_relative_eq!(chain.j1, 0.12, max_relative = 0.01);
        assert_eq!(chain.j2, 0.0);
    }

    #[test]
    fn design_rabi_and_ladder() {
        let s = Scenario {
            n_qubits: 3,
            ..Scenario::design()
        };
        assert_relative_eq!(s.rabi(), 0.259, max_relative = 0.01);
        let chain = s.chain().unwrap();
        assert_eq!(chain.n(), 3);
        assert_relative_eq!(
            chain.omega[2],
            chain.omega[0] * 1.05 * 1.05,
            max_relative = 1e-14
        );
        assert_relative_eq!(chain.j2, chain.j1 / 8.0, max_relative = 1e-14);
    }

    #[test]
    fn overrides_win() {
        let s = Scenario {
            omega1: Some(10.0),
            j1: Some(0.2),
            rabi: Some(0.0),
            ..Scenario::design()
        };
        let chain = s.chain().unwrap();
        assert_eq!(chain.omega[0], 10.0);
        assert_eq!(chain.j1, 0.2);
        assert_eq!(s.rabi(), 0.0);
        assert!(Scenario {
            n_qubits: 0,
            ..Scenario::design()
        }
        .chain()
        .is_err());
        assert!(Scenario {
            rabi: Some(-1.0),
            ..Scenario::design()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn json_rejects_unknown_keys() {
        assert!(serde_json::from_str::<Scenario>(r#"{"n_qubits": 2, "nope": 1}"#).is_err());
        let s: Scenario =
            serde_json::from_str(r#"{"physical": {"xi": 1.0}, "rabi": 0.07}"#).unwrap();
        assert_eq!(s.physical.xi, 1.0);
        assert_eq!(s.n_qubits, 2);
    }
}
