//! Steady states, their feasibility, and local and global stability tests.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{self, Mat2, ModelParams, State, Vec2};
use crate::newton::{self, Evaluation, NewtonOptions};
use crate::{all_hold, Condition, Error, Exec, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumKind {
    Trivial,
    Axial,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    pub point: State,
    pub feasible: bool,
    pub feasibility_notes: Vec<Condition>,
    /// Every distinct positive root found by the solver (interior only).
    pub roots: Vec<State>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    StableNode,
    StableFocus,
    UnstableNode,
    UnstableFocus,
    Saddle,
    CenterCandidate,
}

impl Classification {
    pub fn is_stable(self) -> bool {
        matches!(
            self,
            Classification::StableNode | Classification::StableFocus
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::StableNode => "StableNode",
            Classification::StableFocus => "StableFocus",
            Classification::UnstableNode => "UnstableNode",
            Classification::UnstableFocus => "UnstableFocus",
            Classification::Saddle => "Saddle",
            Classification::CenterCandidate => "CenterCandidate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub trace: f64,
    pub determinant: f64,
    pub eigenvalues: [Complex64; 2],
    pub classification: Classification,
    /// A zero eigenvalue is present (non-hyperbolic, determinant zero).
    pub degenerate: bool,
    /// Sufficient-condition flags reported next to the eigenvalue verdict:
    /// the two interior inequalities, or the axial stability window.
    pub las_sufficient: Vec<Condition>,
}

/// Trace below this magnitude (with positive determinant) marks a center candidate.
pub const CENTER_TRACE_TOL: f64 = 1e-10;

/// Trace/determinant taxonomy of a 2×2 Jacobian.
pub fn stability_of(j: Mat2) -> StabilityReport {
    let trace = j[0][0] + j[1][1];
    let determinant = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let eigenvalues = eigenvalues(j, trace, determinant);
    let scale = j.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let degenerate = eigenvalues
        .iter()
        .any(|l| l.norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE))
        || determinant == 0.0;
    let classification = if degenerate {
        Classification::CenterCandidate
    } else if determinant < 0.0 {
        Classification::Saddle
    } else if trace.abs() < CENTER_TRACE_TOL {
        Classification::CenterCandidate
    } else {
        let focus = eigenvalues[0].im != 0.0;
        match (trace < 0.0, focus) {
            (true, false) => Classification::StableNode,
            (true, true) => Classification::StableFocus,
            (false, false) => Classification::UnstableNode,
            (false, true) => Classification::UnstableFocus,
        }
    };
    StabilityReport {
        trace,
        determinant,
        eigenvalues,
        classification,
        degenerate,
        las_sufficient: Vec::new(),
    }
}

/// Roots of `l^2 - trace l + det`. Triangular matrices return their diagonal
/// exactly, in diagonal order.
fn eigenvalues(j: Mat2, trace: f64, det: f64) -> [Complex64; 2] {
    if j[0][1] == 0.0 || j[1][0] == 0.0 {
        return [Complex64::new(j[0][0], 0.0), Complex64::new(j[1][1], 0.0)];
    }
    let half = 0.5 * trace;
    let disc = half * half - det;
    if disc >= 0.0 {
        // avoid cancellation in the smaller root
        let big = half + half.signum() * disc.sqrt();
        let small = if big != 0.0 { det / big } else { 0.0 };
        [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
    } else {
        let im = (-disc).sqrt();
        [Complex64::new(half, im), Complex64::new(half, -im)]
    }
}

pub fn trivial_equilibrium(params: &ModelParams) -> Result<(Equilibrium, StabilityReport)> {
    params.validate()?;
    let point = State::new(0.0, 0.0);
    let report = stability_of(model::jacobian(params, point)?);
    let eq = Equilibrium {
        kind: EquilibriumKind::Trivial,
        point,
        feasible: true,
        feasibility_notes: Vec::new(),
        roots: Vec::new(),
    };
    Ok((eq, report))
}

/// Prey-only steady state `x1 = k (1 - q1 E1 / r)`.
pub fn axial_equilibrium(params: &ModelParams) -> Result<(Equilibrium, StabilityReport)> {
    params.validate()?;
    let harvest = params.prey_harvest();
    if params.r <= harvest {
        return Err(Error::Infeasible {
            r: params.r,
            harvest,
        });
    }
    let x1 = params.k * (1.0 - harvest / params.r);
    let point = State::new(x1, 0.0);
    let mut report = stability_of(model::jacobian(params, point)?);
    report
        .las_sufficient
        .push(Condition::new("axial_las_window", axial_window(params)));
    let eq = Equilibrium {
        kind: EquilibriumKind::Axial,
        point,
        feasible: true,
        feasibility_notes: vec![Condition::new("r_above_prey_harvest", true)],
        roots: Vec::new(),
    };
    Ok((eq, report))
}

/// `1 - (d + q2 E2)/(e p k - a k (d + q2 E2)) < q1 E1 / r < 1`.
fn axial_window(params: &ModelParams) -> bool {
    let loss = params.predator_loss();
    let lower = 1.0 - loss / (params.e * params.p * params.k - params.a * params.k * loss);
    let ratio = params.prey_harvest() / params.r;
    lower < ratio && ratio < 1.0
}

/// Nullcline residuals: the prey equation divided by `x` and the predator
/// equation divided by `y`, with their Jacobian.
fn nullcline_system(params: &ModelParams, v: Vec2) -> Option<Evaluation> {
    let state = State::from_array(v);
    let den = params.denominator(state);
    if !(den > 0.0) || !den.is_finite() {
        return None;
    }
    let [x, y] = v;
    let ModelParams {
        r, k, p, a, m, e, ..
    } = *params;
    let u = 1.0 - m * y;
    let den2 = den * den;
    let logistic = r * (1.0 - x / k);
    let predation = p * u * y / den;
    let gain = e * p * u * x / den;
    Some(Evaluation {
        residual: [
            logistic - predation - params.prey_harvest(),
            gain - params.predator_loss(),
        ],
        scale: [
            r.max(logistic.abs()) + predation.abs() + params.prey_harvest(),
            gain.abs() + params.predator_loss(),
        ],
        jacobian: [
            [
                -r / k + p * a * u * u * y / den2,
                -p * (1.0 - 2.0 * m * y + a * x * u * u) / den2,
            ],
            [e * p * u / den2, -e * p * m * x / den2],
        ],
    })
}

/// The 8×8 log-spaced start grid over `(0, k] × (0, min(1/m, k)]`.
pub fn interior_starts(params: &ModelParams) -> Vec<Vec2> {
    let y_hi = if params.m > 0.0 {
        (1.0 / params.m).min(params.k)
    } else {
        params.k
    };
    newton::grid_starts(&newton::log_grid(params.k, 8), &newton::log_grid(y_hi, 8))
}

fn admissible_root(params: &ModelParams, v: Vec2) -> bool {
    v[0] > 0.0 && v[1] > 0.0 && params.denominator(State::from_array(v)) > 0.0
}

/// Solves for the coexistence steady state.
///
/// With a guess, Newton starts there and falls back to multistart if that
/// fails. The smallest-`x` positive root is returned; all positive roots
/// are listed in `roots`.
pub fn interior_equilibrium(params: &ModelParams, guess: Option<State>) -> Result<Equilibrium> {
    interior_equilibrium_with(params, guess, Exec::default())
}

pub fn interior_equilibrium_with(
    params: &ModelParams,
    guess: Option<State>,
    exec: Exec,
) -> Result<Equilibrium> {
    params.validate()?;
    let opts = NewtonOptions::default();
    let solve_one = |s: Vec2| newton::solve(|v| nullcline_system(params, v), s, &opts);

    if let Some(g) = guess {
        if let Ok(sol) = solve_one(g.as_array()) {
            if admissible_root(params, sol.root) {
                let point = State::from_array(sol.root);
                return Ok(build_interior(params, point, vec![point]));
            }
        }
    }

    let outcome = newton::multistart(&interior_starts(params), exec, solve_one);
    if outcome.roots.is_empty() {
        return Err(outcome
            .last_error
            .unwrap_or_else(|| Error::NoConvergence("no start converged".into())));
    }
    let mut positive: Vec<State> = outcome
        .roots
        .iter()
        .filter(|s| admissible_root(params, s.root))
        .map(|s| State::from_array(s.root))
        .collect();
    if positive.is_empty() {
        return Err(Error::NoPositiveRoot);
    }
    positive.sort_by(|a, b| a.x.total_cmp(&b.x));
    if positive.len() > 1 {
        log::info!(
            "{} interior roots found; selecting smallest x",
            positive.len()
        );
    }
    Ok(build_interior(params, positive[0], positive))
}

fn build_interior(params: &ModelParams, point: State, roots: Vec<State>) -> Equilibrium {
    let notes = interior_conditions(params, point);
    Equilibrium {
        kind: EquilibriumKind::Interior,
        point,
        feasible: all_hold(&notes),
        feasibility_notes: notes,
        roots,
    }
}

fn interior_conditions(params: &ModelParams, point: State) -> Vec<Condition> {
    let e1_bound = params.r / params.q1 * (1.0 - point.x / params.k);
    let e2_bound = (params.e * params.p - params.a * params.d) / (params.a * params.q2);
    vec![
        Condition::new("prey_effort_below_bound", params.effort1 < e1_bound),
        Condition::new("predator_effort_below_bound", params.effort2 < e2_bound),
    ]
}

/// Evaluates the two effort bounds for an interior equilibrium.
pub fn feasibility_interior(params: &ModelParams, eq: &Equilibrium) -> Result<Vec<Condition>> {
    expect_interior(eq)?;
    Ok(interior_conditions(params, eq.point))
}

fn expect_interior(eq: &Equilibrium) -> Result<()> {
    if eq.kind != EquilibriumKind::Interior {
        return Err(Error::WrongKind {
            expected: EquilibriumKind::Interior,
            found: eq.kind,
        });
    }
    Ok(())
}

/// Eigenvalue classification at an equilibrium, plus the sufficient
/// conditions attached to its kind.
pub fn classify(params: &ModelParams, eq: &Equilibrium) -> Result<StabilityReport> {
    let mut report = stability_of(model::jacobian(params, eq.point)?);
    match eq.kind {
        EquilibriumKind::Interior => {
            report.las_sufficient = interior_las_conditions(params, eq.point);
            let flags = all_hold(&report.las_sufficient);
            if flags != report.classification.is_stable() {
                log::debug!(
                    "sufficient conditions ({flags}) disagree with eigenvalues ({:?}) at {:?}",
                    report.classification,
                    eq.point
                );
            }
        }
        EquilibriumKind::Axial => {
            report
                .las_sufficient
                .push(Condition::new("axial_las_window", axial_window(params)));
        }
        EquilibriumKind::Trivial => {}
    }
    Ok(report)
}

/// The two sufficient inequalities for interior stability, evaluated as stated.
pub fn interior_las_conditions(params: &ModelParams, point: State) -> Vec<Condition> {
    let State { x, y } = point;
    let ModelParams { r, p, a, m, e, .. } = *params;
    let u = 1.0 - m * y;
    let den = 1.0 + a * x * u;
    let lhs1 = e * a * x * u * u * (p + y - p * x) + e * y;
    let rhs1 = p * y * (m * y - p - m * e * x) + r * x * den * den;
    vec![
        Condition::new("interior_las_1", lhs1 > rhs1),
        Condition::new("interior_las_2", p * y * u > den * den),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub big_a: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasCheck {
    /// `4 r m e (1 + a k)(1 + a x*)`.
    pub lhs: f64,
    /// `p m^2 y*^2`.
    pub rhs: f64,
    pub holds: bool,
    /// Coefficients of `-dV/dt` at a probe state, when one was supplied.
    pub form: Option<QuadraticForm>,
}

/// Global-stability inequality for the interior equilibrium and, optionally,
/// the quadratic-form coefficients of the Lyapunov derivative at `probe`.
pub fn gas_condition(
    params: &ModelParams,
    eq: &Equilibrium,
    probe: Option<State>,
) -> Result<GasCheck> {
    expect_interior(eq)?;
    let ModelParams {
        r, k, p, a, m, e, ..
    } = *params;
    let State { x: xs, y: ys } = eq.point;
    let lhs = 4.0 * r * m * e * (1.0 + a * k) * (1.0 + a * xs);
    let rhs = p * m * m * ys * ys;
    let form = probe.map(|s| {
        let State { x, y } = s;
        let big_a = (1.0 + a * x * (1.0 - m * y)) * (1.0 + a * xs * (1.0 - m * ys));
        QuadraticForm {
            alpha: r / k + p * m * (y + ys) / big_a - p * y * (1.0 + m * y * ys) / big_a,
            beta: m * x * e * p / big_a,
            gamma: (p * x * (1.0 + m * y * ys) + p * (1.0 - m * (y + ys))
                - e * p
                - e * p * ys
                - p * (y + ys))
                / big_a,
            big_a,
        }
    });
    Ok(GasCheck {
        lhs,
        rhs,
        holds: lhs > rhs,
        form,
    })
}
