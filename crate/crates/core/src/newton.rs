//! Damped Newton iteration for planar systems, with deterministic multistart.

use crate::model::{Mat2, Vec2};
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    pub max_halvings: u32,
    /// Tolerance on `max_i |g_i| / scale_i`.
    pub residual_tol: f64,
    /// Tolerance on `|step_i| / max(1, |x_i|)`.
    pub step_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            max_halvings: 30,
            residual_tol: 1e-12,
            step_tol: 1e-13,
        }
    }
}

/// One evaluation of the system: residual, the magnitude each residual
/// component is measured against, and the Jacobian.
#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub residual: Vec2,
    pub scale: Vec2,
    pub jacobian: Mat2,
}

impl Evaluation {
    pub fn relative_residual(&self) -> f64 {
        relative(self.residual, self.scale)
    }
}

pub fn relative(residual: Vec2, scale: Vec2) -> f64 {
    (0..2)
        .map(|i| residual[i].abs() / scale[i].abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Solution {
    pub root: Vec2,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Solves `J s = b` for a 2×2 system; `None` when `J` is numerically singular.
pub fn solve2(j: Mat2, b: Vec2) -> Option<Vec2> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let norm = j.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if !det.is_finite() || det.abs() <= 1e-300 || det.abs() <= f64::EPSILON * norm * norm * 1e-3 {
        return None;
    }
    Some([
        (b[0] * j[1][1] - b[1] * j[0][1]) / det,
        (j[0][0] * b[1] - j[1][0] * b[0]) / det,
    ])
}

/// Damped Newton from `start`. `system` returns `None` outside its domain;
/// such trial points are treated like a merit increase and the step halved.
pub fn solve<F>(system: F, start: Vec2, opts: &NewtonOptions) -> Result<Solution>
where
    F: Fn(Vec2) -> Option<Evaluation>,
{
    let mut x = start;
    let mut ev = system(x)
        .ok_or_else(|| Error::NoConvergence(format!("start {start:?} outside the domain")))?;
    for iter in 0..opts.max_iter {
        let res = ev.relative_residual();
        let step = solve2(ev.jacobian, [-ev.residual[0], -ev.residual[1]]);
        let Some(step) = step else {
            if res <= opts.residual_tol {
                return Ok(done(x, iter, res));
            }
            return Err(Error::NoConvergence(format!("singular Jacobian at {x:?}")));
        };
        let small = (0..2).all(|i| step[i].abs() <= opts.step_tol * x[i].abs().max(1.0));
        if res <= opts.residual_tol && small {
            return Ok(done(x, iter, res));
        }

        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = [x[0] + lambda * step[0], x[1] + lambda * step[1]];
            if let Some(trial_ev) = system(trial) {
                let trial_res = trial_ev.relative_residual();
                if trial_res.is_finite() && trial_res < res {
                    accepted = Some((trial, trial_ev));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((trial, trial_ev)) => {
                x = trial;
                ev = trial_ev;
            }
            // no descent left: either converged to rounding level or stuck
            None if res <= opts.residual_tol => return Ok(done(x, iter, res)),
            None => {
                return Err(Error::NoConvergence(format!(
                    "line search failed at {x:?} (relative residual {res:e})"
                )))
            }
        }
    }
    let res = ev.relative_residual();
    if res <= opts.residual_tol {
        Ok(done(x, opts.max_iter, res))
    } else {
        Err(Error::NoConvergence(format!(
            "{} iterations, relative residual {res:e}",
            opts.max_iter
        )))
    }
}

fn done(root: Vec2, iterations: usize, relative_residual: f64) -> Solution {
    Solution {
        root,
        iterations,
        relative_residual,
    }
}

/// `n` log-spaced points covering `[hi * 1e-3, hi]`.
pub fn log_grid(hi: f64, n: usize) -> Vec<f64> {
    let lo = hi * 1e-3;
    if n == 1 {
        return vec![hi];
    }
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

/// Cartesian product of two axes as start points.
pub fn grid_starts(xs: &[f64], ys: &[f64]) -> Vec<Vec2> {
    xs.iter()
        .flat_map(|&x| ys.iter().map(move |&y| [x, y]))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Multistart {
    /// Distinct roots, in the order of the first start that reached each.
    pub roots: Vec<Solution>,
    pub failures: usize,
    pub last_error: Option<Error>,
}

fn same_root(a: Vec2, b: Vec2) -> bool {
    (0..2).all(|i| (a[i] - b[i]).abs() <= 1e-7 * a[i].abs().max(1.0))
}

/// Runs `solve_one` from every start and deduplicates the converged roots.
/// The result depends only on the start order, not on `exec`.
pub fn multistart<F>(starts: &[Vec2], exec: Exec, solve_one: F) -> Multistart
where
    F: Fn(Vec2) -> Result<Solution> + Sync + Send,
{
    let outcomes = exec.map(starts, |&s| solve_one(s));
    let mut roots: Vec<Solution> = Vec::new();
    let mut failures = 0;
    let mut last_error = None;
    for outcome in outcomes {
        match outcome {
            Ok(sol) => {
                if !roots.iter().any(|r| same_root(r.root, sol.root)) {
                    roots.push(sol);
                }
            }
            Err(e) => {
                failures += 1;
                last_error = Some(e);
            }
        }
    }
    Multistart {
        roots,
        failures,
        last_error,
    }
}
