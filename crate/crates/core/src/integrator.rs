//! Dormand–Prince 5(4) with FSAL and proportional-integral step control.

use crate::model::Vec2;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Steps below `min_step_factor * max(1, |t|)` count as underflow.
    pub min_step_factor: f64,
}

/// Why integration stopped early.
#[derive(Debug, Clone)]
pub enum Halt {
    Underflow { t: f64, step: f64 },
    Rhs(crate::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// fifth-order weights minus fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const ALPHA: f64 = 0.7 / 5.0;
const BETA: f64 = 0.4 / 5.0;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

/// Integrates `y' = f(t, y)` from `t0` to `t_end`, calling `observe` on the
/// initial point and after every accepted step. `reject_state` lets the
/// caller veto an otherwise accurate step (the step is then halved).
pub fn dormand_prince<F, R, O>(
    f: F,
    t0: f64,
    y0: Vec2,
    t_end: f64,
    control: &StepControl,
    reject_state: R,
    mut observe: O,
) -> std::result::Result<Stats, Halt>
where
    F: Fn(f64, Vec2) -> Result<Vec2>,
    R: Fn(Vec2) -> bool,
    O: FnMut(f64, Vec2),
{
    let mut stats = Stats::default();
    let mut t = t0;
    let mut y = y0;
    observe(t, y);
    if t_end <= t0 {
        return Ok(stats);
    }
    let mut k0 = f(t, y).map_err(Halt::Rhs)?;
    stats.evaluations += 1;

    let span = t_end - t0;
    let rhs_scale = (k0[0].abs().max(k0[1].abs())) / (1.0 + y[0].abs().max(y[1].abs()));
    let mut h = (1e-3 * span / rhs_scale.max(1.0)).min(control.max_step);
    let mut prev_err: f64 = 1e-4;
    let mut last_rejected = false;

    while t < t_end {
        let min_step = control.min_step_factor * t.abs().max(1.0);
        if h < min_step {
            return Err(Halt::Underflow { t, step: h });
        }
        let finishing = t + h >= t_end;
        if finishing {
            h = t_end - t;
        }

        let mut k = [[0.0; 2]; 7];
        k[0] = k0;
        let mut failed = false;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let w = A[s][j];
                if w != 0.0 {
                    ys[0] += h * w * kj[0];
                    ys[1] += h * w * kj[1];
                }
            }
            stats.evaluations += 1;
            match f(t + C[s] * h, ys) {
                Ok(v) if v[0].is_finite() && v[1].is_finite() => k[s] = v,
                _ => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            stats.rejected += 1;
            last_rejected = true;
            h *= 0.25;
            continue;
        }
        // the last stage is evaluated at the fifth-order solution
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            y_new[0] += h * A[6][j] * kj[0];
            y_new[1] += h * A[6][j] * kj[1];
        }
        let mut sq = 0.0;
        for i in 0..2 {
            let err: f64 = (0..7).map(|s| E[s] * k[s][i]).sum::<f64>() * h;
            let sc = control.abs_tol + control.rel_tol * y[i].abs().max(y_new[i].abs());
            sq += (err / sc).powi(2);
        }
        let err = (sq / 2.0).sqrt();

        if !err.is_finite() || err > 1.0 {
            stats.rejected += 1;
            let factor = if err.is_finite() {
                (SAFETY * err.powf(-ALPHA)).max(MIN_FACTOR)
            } else {
                MIN_FACTOR
            };
            h *= factor.min(1.0);
            last_rejected = true;
            continue;
        }
        if reject_state(y_new) {
            stats.rejected += 1;
            h *= 0.5;
            last_rejected = true;
            continue;
        }

        stats.accepted += 1;
        t = if finishing { t_end } else { t + h };
        y = y_new;
        k0 = k[6];
        observe(t, y);

        let err_eff = err.max(1e-10);
        let mut factor = SAFETY * err_eff.powf(-ALPHA) * prev_err.powf(BETA);
        factor = factor.clamp(MIN_FACTOR, MAX_FACTOR);
        if last_rejected {
            factor = factor.min(1.0);
        }
        prev_err = err_eff;
        last_rejected = false;
        h = (h * factor).min(control.max_step);
    }
    Ok(stats)
}
