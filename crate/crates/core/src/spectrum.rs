//! Computational basis, the diagonal Ising-Zeeman spectrum and the
//! single-flip structure of the transverse drive.
//!
//! Sites are numbered 1..=N and site 1 is the least significant bit of a
//! basis index, so the label of index 2 in a two-spin chain is `10`.
//! Energies use ħ = 1 and are measured in units of ħω₀.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, SpinChainError};

/// Largest chain the state-vector engine accepts.
pub const MAX_QUBITS: usize = 20;

/// Absolute tolerance (units ω₀) below which two energies count as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// "J ≪ ω" is taken to mean |J| ≤ this fraction of the smallest Larmor frequency.
const WEAK_COUPLING_RATIO: f64 = 0.1;

/// Dimensionless N-spin model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    /// Larmor frequencies ω_1..ω_N.
    pub omega: Vec<f64>,
    /// Nearest-neighbor coupling J.
    pub j1: f64,
    /// Next-nearest-neighbor coupling J′.
    pub j2: f64,
}

/// Soft violations of the weak-coupling regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChainWarning {
    /// |J′| ≥ |J| with J ≠ 0.
    NextNearestNotWeaker { j1: f64, j2: f64 },
    /// |J| is not small against min ω_j.
    CouplingNotWeak { j1: f64, min_omega: f64 },
}

impl fmt::Display for ChainWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainWarning::NextNearestNotWeaker { j1, j2 } => {
                write!(
                    f,
                    "next-nearest coupling |J'|={} is not below |J|={}",
                    j2.abs(),
                    j1.abs()
                )
            }
            ChainWarning::CouplingNotWeak { j1, min_omega } => {
                write!(
                    f,
                    "coupling |J|={} is not small against min omega {}",
                    j1.abs(),
                    min_omega
                )
            }
        }
    }
}

impl ChainSpec {
    pub fn new(omega: Vec<f64>, j1: f64, j2: f64) -> Result<Self> {
        let chain = ChainSpec { omega, j1, j2 };
        chain.check()?;
        Ok(chain)
    }

    pub fn n(&self) -> usize {
        self.omega.len()
    }

    pub fn dim(&self) -> usize {
        1usize << self.n()
    }

    /// Hard invariants: at least one site, finite positive Larmor
    /// frequencies, finite couplings, within [`MAX_QUBITS`].
    pub fn check(&self) -> Result<()> {
        if self.omega.is_empty() {
            return Err(SpinChainError::domain(
                "omega",
                "chain needs at least one site",
            ));
        }
        if self.n() > MAX_QUBITS {
            return Err(SpinChainError::TooManyQubits {
                n: self.n(),
                cap: MAX_QUBITS,
            });
        }
        if let Some(w) = self.omega.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(SpinChainError::domain(
                "omega",
                format!("Larmor frequencies must be positive, got {w}"),
            ));
        }
        if !self.j1.is_finite() || !self.j2.is_finite() {
            return Err(SpinChainError::domain("j1/j2", "couplings must be finite"));
        }
        Ok(())
    }

    /// Soft checks of |J′| < |J| ≪ min ω, skipped when J = 0.
    pub fn warnings(&self) -> Vec<ChainWarning> {
        let mut out = Vec::new();
        if self.j1 == 0.0 {
            return out;
        }
        if self.n() >= 3 && self.j2.abs() >= self.j1.abs() {
            out.push(ChainWarning::NextNearestNotWeaker {
                j1: self.j1,
                j2: self.j2,
            });
        }
        let min_omega = self.omega.iter().cloned().fold(f64::INFINITY, f64::min);
        if self.j1.abs() > WEAK_COUPLING_RATIO * min_omega {
            out.push(ChainWarning::CouplingNotWeak {
                j1: self.j1,
                min_omega,
            });
        }
        out
    }

    /// Emit [`ChainSpec::warnings`] through the logger.
    pub fn log_warnings(&self) {
        for w in self.warnings() {
            log::warn!("{w}");
        }
    }
}

/// Computational basis state |ξ_N…ξ_1⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisState {
    index: usize,
    n: usize,
}

impl BasisState {
    pub fn new(index: usize, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(SpinChainError::TooManyQubits { n, cap: MAX_QUBITS });
        }
        if index >= (1usize << n) {
            return Err(SpinChainError::BasisOutOfRange { index, n });
        }
        Ok(BasisState { index, n })
    }

    /// Parse a bit string written ξ_N…ξ_1, e.g. `"10"` is site 2 excited.
    pub fn from_label(label: &str) -> Result<Self> {
        let n = label.len();
        if n == 0 || !label.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(SpinChainError::domain(
                "label",
                format!("not a bit string: {label:?}"),
            ));
        }
        let index = usize::from_str_radix(label, 2)
            .map_err(|e| SpinChainError::domain("label", e.to_string()))?;
        BasisState::new(index, n)
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// ξ_site for a 1-based site.
    pub fn bit(&self, site: usize) -> u8 {
        debug_assert!((1..=self.n).contains(&site));
        ((self.index >> (site - 1)) & 1) as u8
    }

    /// The state with site `site` (1-based) flipped.
    pub fn flipped(&self, site: usize) -> BasisState {
        BasisState {
            index: self.index ^ (1 << (site - 1)),
            n: self.n,
        }
    }

    pub fn label(&self) -> String {
        label_of(self.index, self.n)
    }

    /// Bitwise complement (every spin flipped).
    pub fn complement(&self) -> BasisState {
        BasisState {
            index: !self.index & ((1 << self.n) - 1),
            n: self.n,
        }
    }
}

pub(crate) fn label_of(index: usize, n: usize) -> String {
    format!("{index:0n$b}")
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}⟩", self.label())
    }
}

impl Serialize for BasisState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for BasisState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BasisState::from_label(&s).map_err(serde::de::Error::custom)
    }
}

#[inline]
fn parity_sign(a: usize, b: usize) -> f64 {
    if (a ^ b) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Energy of a basis index, assuming `index < 2^N`.
pub(crate) fn energy_of_index(index: usize, chain: &ChainSpec) -> f64 {
    let n = chain.n();
    let bit = |site0: usize| (index >> site0) & 1;
    let mut zeeman = 0.0;
    for (j, w) in chain.omega.iter().enumerate() {
        zeeman -= if bit(j) == 0 { *w } else { -*w };
    }
    let mut nn = 0.0;
    for k in 0..n.saturating_sub(1) {
        nn += parity_sign(bit(k), bit(k + 1));
    }
    let mut nnn = 0.0;
    for l in 0..n.saturating_sub(2) {
        nnn += parity_sign(bit(l), bit(l + 2));
    }
    0.5 * (zeeman + 0.5 * chain.j1 * nn + 0.5 * chain.j2 * nnn)
}

/// Diagonal energy E_ξ of a basis state.
pub fn energy(state: BasisState, chain: &ChainSpec) -> Result<f64> {
    if state.n_qubits() != chain.n() {
        return Err(SpinChainError::DimensionMismatch {
            expected: chain.n(),
            got: state.n_qubits(),
        });
    }
    Ok(energy_of_index(state.index(), chain))
}

/// All 2^N energies, indexed by basis index.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySpectrum {
    n: usize,
    energies: Vec<f64>,
}

impl EnergySpectrum {
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, state: BasisState) -> f64 {
        self.energies[state.index()]
    }

    pub fn ground(&self) -> BasisState {
        let idx = argbest(&self.energies, |a, b| a < b);
        BasisState {
            index: idx,
            n: self.n,
        }
    }

    pub fn top(&self) -> BasisState {
        let idx = argbest(&self.energies, |a, b| a > b);
        BasisState {
            index: idx,
            n: self.n,
        }
    }

    /// True when no two energies lie within [`DEGENERACY_TOL`].
    pub fn is_injective(&self) -> bool {
        let mut sorted = self.energies.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        sorted.windows(2).all(|w| w[1] - w[0] > DEGENERACY_TOL)
    }
}

fn argbest(v: &[f64], better: impl Fn(f64, f64) -> bool) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if better(x, v[best]) {
            best = i;
        }
    }
    best
}

/// The full diagonal spectrum. When the chain is in the weak-coupling regime
/// the ground state must be |0…0⟩ and the top state |1…1⟩.
pub fn full_spectrum(chain: &ChainSpec) -> Result<EnergySpectrum> {
    chain.check()?;
    let n = chain.n();
    let energies: Vec<f64> = (0..chain.dim())
        .map(|i| energy_of_index(i, chain))
        .collect();
    let spectrum = EnergySpectrum { n, energies };
    if chain.warnings().is_empty() && chain.j1 != 0.0 {
        let top = chain.dim() - 1;
        if spectrum.ground().index() != 0 || spectrum.top().index() != top {
            return Err(SpinChainError::SpectrumOrdering(format!(
                "ground {} / top {} in the weak-coupling regime",
                spectrum.ground(),
                spectrum.top()
            )));
        }
    }
    Ok(spectrum)
}

/// |E_a − E_b| in units of ω₀.
pub fn transition_frequency(a: BasisState, b: BasisState, chain: &ChainSpec) -> Result<f64> {
    if a == b {
        return Err(SpinChainError::IdenticalStates);
    }
    Ok((energy(a, chain)? - energy(b, chain)?).abs())
}

/// Direction of a drive-induced single-spin flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpinFlip {
    /// ξ_j: 0 → 1, matrix element −(Ω/2)e^{−iθ}.
    Excite,
    /// ξ_j: 1 → 0, matrix element −(Ω/2)e^{+iθ}.
    Relax,
}

/// The N states coupled to `state` by the transverse drive, in site order.
pub fn drive_couplings(
    state: BasisState,
    chain: &ChainSpec,
) -> Result<Vec<(BasisState, SpinFlip)>> {
    if state.n_qubits() != chain.n() {
        return Err(SpinChainError::DimensionMismatch {
            expected: chain.n(),
            got: state.n_qubits(),
        });
    }
    Ok((1..=chain.n())
        .map(|site| {
            let flip = if state.bit(site) == 0 {
                SpinFlip::Excite
            } else {
                SpinFlip::Relax
            };
            (state.flipped(site), flip)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::collections::HashSet;

    fn reference_pair() -> ChainSpec {
        ChainSpec::new(vec![21.287, 21.287 * 1.05], 0.12, 0.0).unwrap()
    }

    fn b(label: &str) -> BasisState {
        BasisState::from_label(label).unwrap()
    }

    #[test]
    fn single_spin_zeeman_pair() {
        let c = ChainSpec::new(vec![21.287], 0.0, 0.0).unwrap();
        assert_relative_eq!(energy(b("0"), &c).unwrap(), -10.6435, epsilon = 1e-12);
        assert_relative_eq!(energy(b("1"), &c).unwrap(), 10.6435, epsilon = 1e-12);
        assert_eq!(full_spectrum(&c).unwrap().energies(), &[-10.6435, 10.6435]);
    }

    #[test]
    fn two_spin_ground_energy() {
        let c = ChainSpec::new(vec![21.287, 22.3514], 0.12, 0.0).unwrap();
        // ½(−(ω₁+ω₂) + J/2)
        assert_relative_eq!(energy(b("00"), &c).unwrap(), -21.7892, epsilon = 1e-10);
    }

    #[test]
    fn free_symmetric_degeneracies() {
        let w = 3.0;
        let c = ChainSpec::new(vec![w; 3], 0.0, 0.0).unwrap();
        let s = full_spectrum(&c).unwrap();
        let count = |e: f64| {
            s.energies()
                .iter()
                .filter(|x| (**x - e).abs() < 1e-12)
                .count()
        };
        assert_eq!(count(-1.5 * w), 1);
        assert_eq!(count(-0.5 * w), 3);
        assert_eq!(count(0.5 * w), 3);
        assert_eq!(count(1.5 * w), 1);
        assert!(!s.is_injective());
    }

    #[test]
    fn reference_pair_spectrum() {
        let s = full_spectrum(&reference_pair()).unwrap();
        assert!(s.is_injective());
        assert_eq!(s.ground(), b("00"));
        assert_eq!(s.top(), b("11"));
        // Zeeman parts cancel in E(00)+E(11); the Ising part contributes 2·(J/4).
        assert_relative_eq!(
            s.get(b("00")) + s.get(b("11")),
            2.0 * 0.12 / 4.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            s.get(b("01")) + s.get(b("10")),
            -2.0 * 0.12 / 4.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn transition_frequencies() {
        let c = reference_pair();
        assert_relative_eq!(
            transition_frequency(b("10"), b("11"), &c).unwrap(),
            21.347,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            transition_frequency(b("00"), b("01"), &c).unwrap(),
            21.227,
            epsilon = 1e-12
        );
        assert_eq!(
            transition_frequency(b("01"), b("01"), &c),
            Err(SpinChainError::IdenticalStates)
        );
    }

    #[test]
    fn drive_neighbors() {
        let c2 = reference_pair();
        let got: HashSet<_> = drive_couplings(b("10"), &c2)
            .unwrap()
            .into_iter()
            .map(|(s, _)| s)
            .collect();
        assert_eq!(got, HashSet::from([b("00"), b("11")]));

        let c1 = ChainSpec::new(vec![1.0], 0.0, 0.0).unwrap();
        assert_eq!(
            drive_couplings(b("0"), &c1).unwrap(),
            vec![(b("1"), SpinFlip::Excite)]
        );

        let c3 = ChainSpec::new(vec![1.0, 2.0, 3.0], 0.1, 0.01).unwrap();
        let got = drive_couplings(b("010"), &c3).unwrap();
        let set: HashSet<_> = got.iter().map(|(s, _)| *s).collect();
        assert_eq!(set, HashSet::from([b("110"), b("000"), b("011")]));
        for (s, flip) in got {
            let expected = if s.index() > b("010").index() {
                SpinFlip::Excite
            } else {
                SpinFlip::Relax
            };
            assert_eq!(flip, expected);
        }
    }

    #[test]
    fn labels_round_trip_and_range() {
        assert_eq!(b("10").index(), 2);
        assert_eq!(b("10").bit(2), 1);
        assert_eq!(b("10").bit(1), 0);
        assert_eq!(BasisState::new(5, 3).unwrap().label(), "101");
        assert!(BasisState::new(4, 2).is_err());
        assert!(BasisState::from_label("12").is_err());
        assert!(BasisState::from_label("").is_err());
        assert_eq!(b("0110").complement(), b("1001"));
        let json = serde_json::to_string(&b("01")).unwrap();
        assert_eq!(json, "\"01\"");
        assert_eq!(serde_json::from_str::<BasisState>(&json).unwrap(), b("01"));
    }

    #[test]
    fn chain_validation() {
        assert!(ChainSpec::new(vec![], 0.0, 0.0).is_err());
        assert!(ChainSpec::new(vec![1.0, -1.0], 0.0, 0.0).is_err());
        assert!(matches!(
            ChainSpec::new(vec![1.0; MAX_QUBITS + 1], 0.0, 0.0),
            Err(SpinChainError::TooManyQubits { .. })
        ));
        assert!(reference_pair().warnings().is_empty());
        let strong = ChainSpec::new(vec![1.0, 1.1, 1.2], 0.5, 0.6).unwrap();
        assert_eq!(strong.warnings().len(), 2);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(energy(b("000"), &reference_pair()).is_err());
        assert!(drive_couplings(b("1"), &reference_pair()).is_err());
    }
}
