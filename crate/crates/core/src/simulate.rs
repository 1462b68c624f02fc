//! Time integration, attractor diagnostics and the refuge sweep.

use serde::{Deserialize, Serialize};

use crate::equilibria::{self, Classification};
use crate::integrator::{self, Halt, StepControl};
use crate::model::{self, ModelParams, State};
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Defaults to `t_end / 1e4` when absent.
    pub max_step: Option<f64>,
    pub transient_fraction: f64,
}

impl SimConfig {
    pub fn new(t_end: f64) -> Self {
        Self {
            t_end,
            rel_tol: 1e-9,
            abs_tol: 1e-9,
            max_step: None,
            transient_fraction: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end must be positive, got {}", self.t_end));
        }
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return bad(format!("max_step must be positive, got {h}"));
            }
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return bad(format!(
                "transient_fraction must lie in [0, 1), got {}",
                self.transient_fraction
            ));
        }
        Ok(())
    }

    pub fn effective_max_step(&self) -> f64 {
        self.max_step.unwrap_or(self.t_end / 1e4)
    }
}

/// Per-sample model validity flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Validity {
    /// `1 + a x (1 - m y) > 0`.
    pub denominator_ok: bool,
    /// `1 - m y >= 0`: the refuge does not exceed the predator population's reach.
    pub refuge_ok: bool,
}

impl Default for Validity {
    fn default() -> Self {
        Self {
            denominator_ok: true,
            refuge_ok: true,
        }
    }
}

impl Validity {
    pub fn of(params: &ModelParams, s: State) -> Self {
        Self {
            denominator_ok: params.denominator(s) > 0.0,
            refuge_ok: 1.0 - params.m * s.y >= 0.0,
        }
    }

    pub fn holds(&self) -> bool {
        self.denominator_ok && self.refuge_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub validity: Vec<Validity>,
    pub params_used: ModelParams,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<State> {
        self.states.last().copied()
    }
}

pub fn integrate(params: &ModelParams, initial: State, config: &SimConfig) -> Result<Trajectory> {
    params.validate()?;
    config.validate()?;
    if !initial.is_nonnegative() {
        return Err(Error::NegativeInitialState {
            x: initial.x,
            y: initial.y,
        });
    }
    params.checked_denominator(initial)?;

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        validity: Vec::new(),
        params_used: *params,
    };
    let control = StepControl {
        rel_tol: config.rel_tol,
        abs_tol: config.abs_tol,
        max_step: config.effective_max_step(),
        min_step_factor: 1e-14,
    };
    let outcome = integrator::dormand_prince(
        |_, v| model::rhs(params, State::from_array(v)),
        0.0,
        initial.as_array(),
        config.t_end,
        &control,
        |v| v[0] < 0.0 || v[1] < 0.0,
        |t, v| {
            let s = State::from_array(v);
            traj.times.push(t);
            traj.states.push(s);
            traj.validity.push(Validity::of(params, s));
        },
    );
    match outcome {
        Ok(_) => Ok(traj),
        Err(Halt::Underflow { t, step }) => Err(Error::StepFailure {
            t,
            step,
            partial: Box::new(traj),
        }),
        Err(Halt::Rhs(err)) => Err(err),
    }
}

/// Integrates one trajectory per initial state; output order follows input.
pub fn simulate_batch(
    params: &ModelParams,
    initials: &[State],
    config: &SimConfig,
    exec: Exec,
) -> Vec<Result<Trajectory>> {
    exec.map(initials, |s| integrate(params, *s, config))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleVerdict {
    Converged,
    Oscillating,
    Diverged,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub verdict: CycleVerdict,
    pub amplitude_x: f64,
    pub amplitude_y: f64,
    pub period_estimate: Option<f64>,
    pub attractor_point: Option<State>,
}

/// Relative agreement required between half-window amplitudes.
pub const HALF_WINDOW_AGREEMENT: f64 = 0.01;

pub fn detect_limit_cycle(traj: &Trajectory, config: &SimConfig) -> Result<CycleReport> {
    let (Some(&t0), Some(&t_last)) = (traj.times.first(), traj.times.last()) else {
        return Err(Error::TooShort {
            span: 0.0,
            required: 2.0 * config.transient_fraction * config.t_end,
        });
    };
    let transient = config.transient_fraction * config.t_end;
    let span = t_last - t0;
    if span < 2.0 * transient || traj.len() < 3 {
        return Err(Error::TooShort {
            span,
            required: 2.0 * transient,
        });
    }

    let start = traj.times.partition_point(|&t| t < t0 + transient);
    let times = &traj.times[start..];
    let states = &traj.states[start..];
    let xs: Vec<f64> = states.iter().map(|s| s.x).collect();
    let ys: Vec<f64> = states.iter().map(|s| s.y).collect();
    let amplitude_x = range(&xs);
    let amplitude_y = range(&ys);
    let last = *states.last().expect("window is nonempty");

    let params = &traj.params_used;
    let xi0 = model::weighted_biomass(params, traj.states[0]);
    let limit = 10.0 * model::ultimate_bound(params).ultimate.max(xi0);
    let report = |verdict, period_estimate, attractor_point| CycleReport {
        verdict,
        amplitude_x,
        amplitude_y,
        period_estimate,
        attractor_point,
    };
    if traj
        .states
        .iter()
        .any(|s| !s.norm_inf().is_finite() || s.norm_inf() > limit)
    {
        return Ok(report(CycleVerdict::Diverged, None, None));
    }
    if amplitude_x <= 1e-4 * (1.0 + last.x.abs()) && amplitude_y <= 1e-4 * (1.0 + last.y.abs()) {
        return Ok(report(CycleVerdict::Converged, None, Some(last)));
    }

    let mid = times.len() / 2;
    let (first_x, second_x) = (range(&xs[..mid]), range(&xs[mid..]));
    let (first_y, second_y) = (range(&ys[..mid]), range(&ys[mid..]));
    let agree = |a: f64, b: f64| (a - b).abs() <= HALF_WINDOW_AGREEMENT * a.max(b);
    let peaks = refined_peaks(times, &xs);
    if peaks.len() >= 3 && agree(first_x, second_x) && agree(first_y, second_y) {
        let period = (peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64;
        return Ok(report(CycleVerdict::Oscillating, Some(period), None));
    }
    Ok(report(CycleVerdict::Inconclusive, None, None))
}

fn range(v: &[f64]) -> f64 {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if v.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Times of strict local maxima, refined by the vertex of the parabola
/// through each sample triple.
pub fn refined_peaks(times: &[f64], values: &[f64]) -> Vec<f64> {
    let mut peaks = Vec::new();
    for i in 1..values.len().saturating_sub(1) {
        let (v0, v1, v2) = (values[i - 1], values[i], values[i + 1]);
        if v1 > v0 && v1 >= v2 {
            let (t0, t1, t2) = (times[i - 1], times[i], times[i + 1]);
            let d0 = (v1 - v0) / (t1 - t0);
            let d1 = (v2 - v1) / (t2 - t1);
            let curvature = (d1 - d0) / (t2 - t0);
            let t = if curvature < 0.0 {
                (0.5 * (t0 + t1) - d0 / (2.0 * curvature)).clamp(t0, t2)
            } else {
                t1
            };
            peaks.push(t);
        }
    }
    peaks
}

/// True when `xi = x + y/e` stays below `max(ultimate, xi(0))` plus slack.
pub fn verify_bound(traj: &Trajectory) -> bool {
    let Some(first) = traj.states.first() else {
        return true;
    };
    let params = &traj.params_used;
    let ultimate = model::ultimate_bound(params).ultimate;
    let cap = ultimate.max(model::weighted_biomass(params, *first)) + 1e-6 * (1.0 + ultimate);
    traj.states
        .iter()
        .all(|s| model::weighted_biomass(params, *s) <= cap)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub m: f64,
    pub equilibrium: Option<State>,
    pub classification: Option<Classification>,
    /// Why the row has no equilibrium, when it has none.
    pub note: Option<String>,
}

/// Interior equilibrium and its classification for each refuge value, in
/// input order, each solve seeded by the previous row's equilibrium.
pub fn sweep_refuge(params: &ModelParams, m_values: &[f64]) -> Vec<SweepRow> {
    let mut seed: Option<State> = None;
    m_values
        .iter()
        .map(|&m| {
            let p = params.with_m(m);
            let solved = equilibria::interior_equilibrium_with(&p, seed, Exec::Sequential)
                .and_then(|eq| equilibria::classify(&p, &eq).map(|rep| (eq, rep)));
            match solved {
                Ok((eq, rep)) => {
                    seed = Some(eq.point);
                    SweepRow {
                        m,
                        equilibrium: Some(eq.point),
                        classification: Some(rep.classification),
                        note: None,
                    }
                }
                Err(err) => SweepRow {
                    m,
                    equilibrium: None,
                    classification: None,
                    note: Some(err.to_string()),
                },
            }
        })
        .collect()
}
