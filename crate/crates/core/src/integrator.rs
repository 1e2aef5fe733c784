//! Explicit Runge–Kutta integration of complex linear systems ẏ = f(t, y).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SpinChainError};

/// Right-hand side of a complex first-order system.
pub trait ComplexSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]);
}

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    /// Classic fourth-order Runge–Kutta with uniform steps no larger than
    /// the given bound.
    Rk4,
    /// Dormand–Prince 5(4) with embedded error control.
    DormandPrince { rtol: f64, atol: f64 },
}

/// Integration settings. `step` overrides the automatic step bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    #[serde(flatten)]
    pub method: Method,
    #[serde(default)]
    pub step: Option<f64>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            step: None,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4_with_step(step: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            step: Some(step),
        }
    }

    pub fn adaptive(rtol: f64, atol: f64) -> Self {
        IntegratorConfig {
            method: Method::DormandPrince { rtol, atol },
            step: None,
        }
    }
}

/// Bookkeeping returned by a single integration.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StepStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest |‖y‖ − ‖y₀‖| seen after any accepted step.
    pub max_norm_drift: f64,
}

impl StepStats {
    pub(crate) fn merge(&mut self, other: StepStats) {
        self.accepted_steps += other.accepted_steps;
        self.rejected_steps += other.rejected_steps;
        self.max_norm_drift = self.max_norm_drift.max(other.max_norm_drift);
    }
}

fn norm(y: &[C64]) -> f64 {
    y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// y ← y + h·Σ cᵢ·kᵢ
fn axpy_into(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, k) in terms {
            if *c != 0.0 {
                acc += k[i] * *c;
            }
        }
        *o = y[i] + acc * h;
    }
}

/// Integrate from `t0` to `t1` in place. `max_step` bounds the step for
/// both methods.
pub fn integrate<S: ComplexSystem>(
    sys: &S,
    y: &mut [C64],
    t0: f64,
    t1: f64,
    max_step: f64,
    method: Method,
) -> Result<StepStats> {
    debug_assert_eq!(y.len(), sys.dim());
    if t1 <= t0 {
        return Ok(StepStats::default());
    }
    match method {
        Method::Rk4 => Ok(rk4(sys, y, t0, t1, max_step)),
        Method::DormandPrince { rtol, atol } => dopri5(sys, y, t0, t1, max_step, rtol, atol),
    }
}

fn rk4<S: ComplexSystem>(sys: &S, y: &mut [C64], t0: f64, t1: f64, max_step: f64) -> StepStats {
    let n = y.len();
    let span = t1 - t0;
    let steps = (span / max_step).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let norm0 = norm(y);

    let zero = C64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut tmp = vec![zero; n];
    let mut stats = StepStats::default();

    for s in 0..steps {
        let t = t0 + s as f64 * h;
        sys.rhs(t, y, &mut k1);
        axpy_into(&mut tmp, y, 0.5 * h, &[(1.0, &k1)]);
        sys.rhs(t + 0.5 * h, &tmp, &mut k2);
        axpy_into(&mut tmp, y, 0.5 * h, &[(1.0, &k2)]);
        sys.rhs(t + 0.5 * h, &tmp, &mut k3);
        axpy_into(&mut tmp, y, h, &[(1.0, &k3)]);
        sys.rhs(t + h, &tmp, &mut k4);
        for i in 0..n {
            y[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        stats.accepted_steps += 1;
        stats.max_norm_drift = stats.max_norm_drift.max((norm(y) - norm0).abs());
    }
    stats
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// b₅ − b₄, including the seventh (FSAL) stage.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn dopri5<S: ComplexSystem>(
    sys: &S,
    y: &mut [C64],
    t0: f64,
    t1: f64,
    max_step: f64,
    rtol: f64,
    atol: f64,
) -> Result<StepStats> {
    let n = y.len();
    let zero = C64::new(0.0, 0.0);
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![zero; n]).collect();
    let mut tmp = vec![zero; n];
    let mut y_new = vec![zero; n];
    let norm0 = norm(y);
    let mut stats = StepStats::default();

    let mut t = t0;
    let mut h = max_step.min(t1 - t0);
    while t < t1 {
        if t + h > t1 {
            h = t1 - t;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(SpinChainError::StepUnderflow { tau: t, step: h });
        }
        sys.rhs(t, y, &mut k[0]);
        {
            let (k0, rest) = k.split_at_mut(1);
            axpy_into(&mut tmp, y, h, &[(A2[0], &k0[0])]);
            sys.rhs(t + C[1] * h, &tmp, &mut rest[0]);
        }
        let stages: [&[f64]; 4] = [&A3, &A4, &A5, &A6];
        for (s, coeffs) in stages.iter().enumerate() {
            let stage = s + 2;
            let (done, rest) = k.split_at_mut(stage);
            let terms: Vec<(f64, &[C64])> = coeffs
                .iter()
                .zip(done.iter())
                .map(|(c, kk)| (*c, kk.as_slice()))
                .collect();
            axpy_into(&mut tmp, y, h, &terms);
            sys.rhs(t + C[stage] * h, &tmp, &mut rest[0]);
        }
        {
            let (done, rest) = k.split_at_mut(6);
            let terms: Vec<(f64, &[C64])> = B5
                .iter()
                .zip(done.iter())
                .map(|(c, kk)| (*c, kk.as_slice()))
                .collect();
            axpy_into(&mut y_new, y, h, &terms);
            sys.rhs(t + h, &y_new, &mut rest[0]);
        }

        let mut err_acc = 0.0;
        for i in 0..n {
            let mut e = zero;
            for (s, coeff) in E.iter().enumerate() {
                e += k[s][i] * *coeff;
            }
            let scale = atol + rtol * y[i].norm().max(y_new[i].norm());
            err_acc += (e.norm() * h / scale).powi(2);
        }
        let err = (err_acc / n as f64).sqrt();

        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&y_new);
            stats.accepted_steps += 1;
            stats.max_norm_drift = stats.max_norm_drift.max((norm(y) - norm0).abs());
        } else {
            stats.rejected_steps += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).min(max_step);
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ẏ = iωy, exact solution y₀e^{iωt}.
    struct Rotor(f64);

    impl ComplexSystem for Rotor {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[C64], dy: &mut [C64]) {
            dy[0] = C64::new(0.0, self.0) * y[0];
        }
    }

    fn exact(omega: f64, t: f64) -> C64 {
        C64::from_polar(1.0, omega * t)
    }

    #[test]
    fn rk4_rotor_accuracy() {
        let mut y = [C64::new(1.0, 0.0)];
        let stats = integrate(&Rotor(2.0), &mut y, 0.0, 3.0, 1e-3, Method::Rk4).unwrap();
        assert_eq!(stats.accepted_steps, 3000);
        assert!((y[0] - exact(2.0, 3.0)).norm() < 1e-11);
    }

    #[test]
    fn rk4_fourth_order() {
        let err = |h: f64| {
            let mut y = [C64::new(1.0, 0.0)];
            integrate(&Rotor(1.0), &mut y, 0.0, 4.0, h, Method::Rk4).unwrap();
            (y[0] - exact(1.0, 4.0)).norm()
        };
        let ratio = err(0.2) / err(0.1);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn dopri_tracks_tolerance() {
        let mut y = [C64::new(1.0, 0.0)];
        let stats = integrate(
            &Rotor(5.0),
            &mut y,
            0.0,
            10.0,
            1.0,
            Method::DormandPrince {
                rtol: 1e-10,
                atol: 1e-12,
            },
        )
        .unwrap();
        assert!((y[0] - exact(5.0, 10.0)).norm() < 1e-7);
        assert!(stats.accepted_steps > 10);
    }

    #[test]
    fn dopri_underflow_reported() {
        let mut y = [C64::new(1.0, 0.0)];
        let res = integrate(
            &Rotor(1.0e6),
            &mut y,
            0.0,
            1.0,
            1.0,
            Method::DormandPrince {
                rtol: 0.0,
                atol: 0.0,
            },
        );
        assert!(matches!(res, Err(SpinChainError::StepUnderflow { .. })));
    }

    #[test]
    fn empty_interval_is_noop() {
        let mut y = [C64::new(0.3, 0.4)];
        let stats = integrate(&Rotor(1.0), &mut y, 1.0, 1.0, 0.1, Method::Rk4).unwrap();
        assert_eq!(stats.accepted_steps, 0);
        assert_eq!(y[0], C64::new(0.3, 0.4));
    }
}
