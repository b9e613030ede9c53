//! Adaptive Dormand–Prince 5(4) integration of complex linear systems.
//!
//! The step is additionally capped by a caller-supplied function of `t`,
//! which the asymptotics code uses to lock the step to a fraction of the
//! local oscillation period.

use num_complex::Complex64;

use crate::error::{DunklError, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    // fifth-order weights; stage 7 is then f at the new point (FSAL)
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between fifth- and embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Step-control settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    /// Smallest admissible step relative to `|t|`.
    pub min_rel_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, initial_step: 1e-3, min_rel_step: 1e-13 }
    }
}

/// Counters from one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integrates `y' = f(t, y)` from `t0` through every checkpoint (sorted,
/// `> t0`), landing on each checkpoint exactly. `max_step(t)` caps the step
/// taken from `t`.
pub fn integrate<F, H>(
    mut f: F,
    t0: f64,
    y0: &[Complex64],
    checkpoints: &[f64],
    opts: &OdeOptions,
    max_step: H,
) -> Result<(Vec<Vec<Complex64>>, OdeStats)>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
    H: Fn(f64) -> f64,
{
    let n = y0.len();
    if checkpoints.windows(2).any(|w| w[1] <= w[0]) || checkpoints.first().is_some_and(|&c| c <= t0) {
        return Err(DunklError::InvalidParameter("checkpoints must increase and exceed t0".into()));
    }
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); n]; 7];
    let mut tmp = vec![Complex64::default(); n];
    let mut ynew = vec![Complex64::default(); n];
    f(t, &y, &mut k[0]);
    stats.evaluations += 1;
    let mut h = opts.initial_step.min(max_step(t));
    for &target in checkpoints {
        while t < target {
            let cap = max_step(t);
            let mut step = h.min(cap);
            let last = t + step >= target;
            if last {
                step = target - t;
            }
            if step < opts.min_rel_step * t.abs().max(1.0) {
                return Err(DunklError::StepUnderflow { t, h: step });
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for j in 0..s {
                        if A[s][j] != 0.0 {
                            acc += k[j][i] * (step * A[s][j]);
                        }
                    }
                    tmp[i] = acc;
                }
                f(t + C[s] * step, &tmp, &mut k[s]);
                if s == 6 {
                    ynew.copy_from_slice(&tmp);
                }
            }
            stats.evaluations += 6;
            let mut err = 0.0f64;
            for i in 0..n {
                let mut e = Complex64::default();
                for j in 0..7 {
                    if E[j] != 0.0 {
                        e += k[j][i] * E[j];
                    }
                }
                let sc = opts.atol + opts.rtol * y[i].norm().max(ynew[i].norm());
                err = err.max((e * step).norm() / sc);
            }
            if !err.is_finite() {
                return Err(DunklError::Internal(format!("non-finite ODE state at t = {t}")));
            }
            if err <= 1.0 {
                stats.accepted += 1;
                t = if last { target } else { t + step };
                y.copy_from_slice(&ynew);
                // FSAL: stage 7 is f at the new point
                k.swap(0, 6);
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || step >= h {
                    h = step * fac;
                }
            } else {
                stats.rejected += 1;
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            }
        }
        out.push(y.clone());
    }
    Ok((out, stats))
}
