#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use spinchain::dynamics::StateVector;
use spinchain::spectrum::{BasisState, ChainSpec};

/// Diagonal of −Σ ω_j S^z_j + J Σ S^z_k S^z_{k+1} + J′ Σ S^z_l S^z_{l+2},
/// assembled from Kronecker products with site 1 as the rightmost factor.
pub fn kron_spectrum(chain: &ChainSpec) -> Vec<f64> {
    let n = chain.n();
    let sz = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, -0.5]);
    let id = DMatrix::<f64>::identity(2, 2);
    let site_op = |site: usize| {
        let mut m = DMatrix::<f64>::identity(1, 1);
        for s in (1..=n).rev() {
            let f = if s == site { &sz } else { &id };
            m = m.kronecker(f);
        }
        m
    };
    let ops: Vec<_> = (1..=n).map(site_op).collect();
    let dim = 1 << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for (j, w) in chain.omega.iter().enumerate() {
        h -= &ops[j] * *w;
    }
    for k in 0..n.saturating_sub(1) {
        h += (&ops[k] * &ops[k + 1]) * chain.j1;
    }
    for l in 0..n.saturating_sub(2) {
        h += (&ops[l] * &ops[l + 2]) * chain.j2;
    }
    (0..dim).map(|i| h[(i, i)]).collect()
}

pub fn b(label: &str) -> BasisState {
    BasisState::from_label(label).unwrap()
}

pub fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
    let raw: Vec<C64> = (0..1 << n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(raw.into_iter().map(|z| z / norm).collect(), 0.0).unwrap()
}

/// A chain in the weak-coupling regime with N sites.
pub fn random_chain(rng: &mut ChaCha8Rng, n: usize) -> ChainSpec {
    let omega1: f64 = rng.random_range(5.0..25.0);
    let f: f64 = rng.random_range(0.02..0.2);
    let omega = (0..n).map(|k| omega1 * (1.0 + f).powi(k as i32)).collect();
    let j1 = rng.random_range(0.0..0.2);
    let j2 = if n >= 3 { j1 / 8.0 } else { 0.0 };
    ChainSpec::new(omega, j1, j2).unwrap()
}

/// Indices of strict interior local maxima.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .collect()
}
