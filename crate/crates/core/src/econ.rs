//! Rent, bionomic equilibria, shadow prices and the discounted optimal
//! steady state of the two-species fishery.

use serde::{Deserialize, Serialize};

use crate::model::{ModelParams, State, Vec2};
use crate::newton::{self, Evaluation, NewtonOptions};
use crate::{equilibria, Condition, Error, Exec, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconParams {
    pub p1: f64,
    pub p2: f64,
    pub c1: f64,
    pub c2: f64,
    /// Instantaneous discount rate.
    pub delta: f64,
}

impl EconParams {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("c1", self.c1),
            ("c2", self.c2),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {value}"),
                });
            }
        }
        if !(self.delta.is_finite() && self.delta >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("must be nonnegative, got {}", self.delta),
            });
        }
        Ok(())
    }

    /// Prey biomass at which prey fishing breaks even.
    pub fn prey_break_even(&self, params: &ModelParams) -> f64 {
        self.c1 / (self.p1 * params.q1)
    }

    /// Predator biomass at which predator fishing breaks even.
    pub fn predator_break_even(&self, params: &ModelParams) -> f64 {
        self.c2 / (self.p2 * params.q2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevenueReport {
    pub pi_x: f64,
    pub pi_y: f64,
    pub pi: f64,
}

pub fn revenue(econ: &EconParams, params: &ModelParams, state: State) -> RevenueReport {
    let pi_x = (econ.p1 * params.q1 * state.x - econ.c1) * params.effort1;
    let pi_y = (econ.p2 * params.q2 * state.y - econ.c2) * params.effort2;
    RevenueReport {
        pi_x,
        pi_y,
        pi: pi_x + pi_y,
    }
}

/// Efforts that make `state` stationary: each nullcline solved for its effort.
pub fn efforts_for_state(params: &ModelParams, state: State) -> Result<(f64, f64)> {
    let den = params.checked_denominator(state)?;
    let ModelParams {
        r,
        k,
        p,
        m,
        d,
        e,
        q1,
        q2,
        ..
    } = *params;
    let State { x, y } = state;
    let u = 1.0 - m * y;
    let e1 = (r * (1.0 - x / k) - p * u * y / den) / q1;
    let e2 = (-d + e * p * u * x / den) / q2;
    Ok((e1, e2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BionomicCase {
    I,
    II,
    III,
    IV,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BionomicEquilibrium {
    pub case_id: BionomicCase,
    pub x_inf: Option<f64>,
    pub y_inf: Option<f64>,
    pub e1_inf: f64,
    pub e2_inf: f64,
    pub exists: bool,
    pub conditions: Vec<Condition>,
}

impl BionomicEquilibrium {
    fn from_conditions(
        case_id: BionomicCase,
        x_inf: Option<f64>,
        y_inf: Option<f64>,
        efforts: (f64, f64),
        conditions: Vec<Condition>,
    ) -> Self {
        Self {
            case_id,
            x_inf,
            y_inf,
            e1_inf: efforts.0,
            e2_inf: efforts.1,
            exists: crate::all_hold(&conditions),
            conditions,
        }
    }
}

/// Evaluates the four open-access cases. Efforts in `params` are ignored.
pub fn bionomic_equilibrium(
    params: &ModelParams,
    econ: &EconParams,
) -> Result<Vec<BionomicEquilibrium>> {
    params.validate()?;
    econ.validate()?;
    Ok(vec![
        case_one(params, econ),
        case_two(params, econ),
        case_three(params, econ),
        case_four(params, econ),
    ])
}

/// Predator fishery closed; prey held at its break-even level.
fn case_one(params: &ModelParams, econ: &EconParams) -> BionomicEquilibrium {
    let ModelParams {
        r,
        k,
        p,
        a,
        m,
        d,
        e,
        q1,
        ..
    } = *params;
    let x = econ.prey_break_even(params);
    // predator nullcline with E2 = 0: (1 - m y) x (e p - a d) = d
    let u = d / (x * (e * p - a * d));
    let y = if m > 0.0 && u.is_finite() {
        (1.0 - u) / m
    } else {
        f64::NAN
    };
    let den = 1.0 + a * x * u;
    let e1 = (r * (1.0 - x / k) - p * u * y / den) / q1;
    let conditions = vec![
        Condition::new("predator_unprofitable", econ.p2 * params.q2 * y < econ.c2),
        Condition::new("positive_predator", y > 0.0),
        Condition::new("positive_prey_effort", e1 > 0.0),
        Condition::new(
            "prey_effort_bound",
            e1 < r / q1 * (1.0 - econ.c1 / (econ.p1 * q1 * k)),
        ),
    ];
    BionomicEquilibrium::from_conditions(
        BionomicCase::I,
        Some(x),
        y.is_finite().then_some(y),
        (e1, 0.0),
        conditions,
    )
}

/// Prey fishery closed; predator held at its break-even level.
fn case_two(params: &ModelParams, econ: &EconParams) -> BionomicEquilibrium {
    let ModelParams {
        r,
        k,
        p,
        a,
        m,
        d,
        e,
        q2,
        ..
    } = *params;
    let y = econ.predator_break_even(params);
    let u = 1.0 - m * y;
    // prey nullcline with E1 = 0: r (1 - x/k)(1 + a u x) = p u y
    // i.e. (r a u / k) x^2 + (r/k - r a u) x + (p u y - r) = 0
    let qa = r * a * u / k;
    let qb = r / k - r * a * u;
    let qc = p * u * y - r;
    let x = smallest_positive_root(qa, qb, qc);
    let (e2, den_ok) = match x {
        Some(x) => {
            let den = 1.0 + a * x * u;
            ((-d + e * p * u * x / den) / q2, den > 0.0)
        }
        None => (f64::NAN, false),
    };
    let conditions = vec![
        Condition::new(
            "prey_unprofitable",
            x.is_some_and(|x| econ.p1 * params.q1 * x < econ.c1),
        ),
        Condition::new("positive_prey", x.is_some() && den_ok),
        Condition::new("positive_predator_effort", e2 > 0.0),
        Condition::new(
            "predator_effort_bound",
            e2 >= (d - econ.p2 * q2 * e * r * k / (4.0 * econ.c2)) / q2,
        ),
    ];
    BionomicEquilibrium::from_conditions(BionomicCase::II, x, Some(y), (0.0, e2), conditions)
}

fn smallest_positive_root(a: f64, b: f64, c: f64) -> Option<f64> {
    let roots: Vec<f64> = if a == 0.0 {
        if b == 0.0 {
            vec![]
        } else {
            vec![-c / b]
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            vec![]
        } else {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            let mut v = vec![q / a];
            if q != 0.0 {
                v.push(c / q);
            }
            v
        }
    };
    roots
        .into_iter()
        .filter(|x| *x > 0.0 && x.is_finite())
        .min_by(f64::total_cmp)
}

/// Both fisheries closed. Biomass is reported at the unharvested
/// coexistence state (the prey-only capacity when there is none); the case
/// never yields an operating equilibrium.
fn case_three(params: &ModelParams, econ: &EconParams) -> BionomicEquilibrium {
    let unharvested = params.with_efforts(0.0, 0.0);
    let point = equilibria::interior_equilibrium_with(&unharvested, None, Exec::Sequential)
        .map(|eq| eq.point)
        .unwrap_or(State::new(params.k, 0.0));
    let conditions = vec![
        Condition::new("prey_unprofitable", econ.p1 * params.q1 * point.x < econ.c1),
        Condition::new(
            "predator_unprofitable",
            econ.p2 * params.q2 * point.y < econ.c2,
        ),
    ];
    BionomicEquilibrium {
        case_id: BionomicCase::III,
        x_inf: Some(point.x),
        y_inf: Some(point.y),
        e1_inf: 0.0,
        e2_inf: 0.0,
        exists: false,
        conditions,
    }
}

/// Both fisheries operating at their break-even levels.
fn case_four(params: &ModelParams, econ: &EconParams) -> BionomicEquilibrium {
    let ModelParams {
        r,
        k,
        p,
        a,
        m,
        d,
        e,
        q1,
        ..
    } = *params;
    let x = econ.prey_break_even(params);
    let y = econ.predator_break_even(params);
    let state = State::new(x, y);
    let (e1, e2) = efforts_for_state(params, state).unwrap_or((f64::NAN, f64::NAN));
    let (p1q1, p2q2) = (econ.p1 * q1, econ.p2 * params.q2);
    let refuge_margin = p2q2 - m * econ.c2;
    let mixed = p1q1 * p2q2 + a * econ.c1 * refuge_margin;
    let cond_i =
        r / q1 * (1.0 - econ.c1 / (p1q1 * k)) > p * refuge_margin * econ.c2 / (p2q2 * mixed);
    let cond_ii = d < e * p * refuge_margin * econ.c1 / mixed;
    let conditions = vec![
        Condition::new("condition_i", cond_i),
        Condition::new("condition_ii", cond_ii),
        Condition::new("positive_efforts", e1 > 0.0 && e2 > 0.0),
    ];
    BionomicEquilibrium::from_conditions(BionomicCase::IV, Some(x), Some(y), (e1, e2), conditions)
}

/// Time-invariant factors `e^{delta t} lambda_i(t)` along the singular path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowPrices {
    pub lambda1_scaled: f64,
    pub lambda2_scaled: f64,
}

pub fn shadow_prices(
    econ: &EconParams,
    params: &ModelParams,
    state: State,
) -> Result<ShadowPrices> {
    check_positive(state)?;
    Ok(ShadowPrices {
        lambda1_scaled: econ.p1 - econ.c1 / (params.q1 * state.x),
        lambda2_scaled: econ.p2 - econ.c2 / (params.q2 * state.y),
    })
}

fn check_positive(state: State) -> Result<()> {
    if state.x > 0.0 && state.y > 0.0 {
        Ok(())
    } else {
        Err(Error::ZeroBiomass {
            x: state.x,
            y: state.y,
        })
    }
}

/// Left-minus-right of the two steady-state adjoint relations, with the
/// largest term magnitude of each as its scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularResiduals {
    pub r9: f64,
    pub r11: f64,
    pub scale9: f64,
    pub scale11: f64,
}

impl SingularResiduals {
    pub fn relative(&self) -> f64 {
        newton::relative([self.r9, self.r11], [self.scale9, self.scale11])
    }
}

pub fn optimal_singular_residuals(
    params: &ModelParams,
    econ: &EconParams,
    state: State,
) -> Result<SingularResiduals> {
    check_positive(state)?;
    let den = params.checked_denominator(state)?;
    let ModelParams {
        r,
        k,
        p,
        a,
        m,
        d,
        e,
        q1,
        q2,
        ..
    } = *params;
    let EconParams {
        p1,
        p2,
        c1,
        c2,
        delta,
    } = *econ;
    let State { x, y } = state;
    let u = 1.0 - m * y;
    let den2 = den * den;
    let l1 = p1 - c1 / (q1 * x);
    let l2 = p2 - c2 / (q2 * y);

    let lhs9 = delta * l1;
    let t9 = [
        p1 * (r * (1.0 - x / k) - p * y * u / den),
        l2 * e * p * y * u / den2,
        l1 * (-r * x / k + p * a * x * y * u * u / den2),
    ];
    let lhs11 = delta * l2;
    let t11 = [
        p2 * (e * p * x * u / den - d),
        p * x * l1 * (a * x * u * u + 1.0 - 2.0 * m * y) / den2,
        -l2 * e * p * m * x * y / den2,
    ];
    let magnitude = |lhs: f64, t: &[f64; 3]| t.iter().fold(lhs.abs(), |acc, v| acc.max(v.abs()));
    Ok(SingularResiduals {
        r9: lhs9 - t9.iter().sum::<f64>(),
        r11: lhs11 - t11.iter().sum::<f64>(),
        scale9: magnitude(lhs9, &t9),
        scale11: magnitude(lhs11, &t11),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalPolicy {
    pub x_opt: f64,
    pub y_opt: f64,
    pub e1_opt: f64,
    pub e2_opt: f64,
    pub residual_9: f64,
    pub residual_11: f64,
    /// `max_i |r_i| / scale_i`.
    pub relative_residual: f64,
}

fn singular_system(params: &ModelParams, econ: &EconParams, v: Vec2) -> Option<Evaluation> {
    let eval = |v: Vec2| optimal_singular_residuals(params, econ, State::from_array(v)).ok();
    let base = eval(v)?;
    let mut jacobian = [[0.0; 2]; 2];
    for col in 0..2 {
        let h = 1e-7 * v[col].abs().max(1e-3);
        let mut plus = v;
        plus[col] += h;
        let mut minus = v;
        minus[col] -= h;
        let (fp, fm) = (eval(plus)?, eval(minus)?);
        jacobian[0][col] = (fp.r9 - fm.r9) / (2.0 * h);
        jacobian[1][col] = (fp.r11 - fm.r11) / (2.0 * h);
    }
    Some(Evaluation {
        residual: [base.r9, base.r11],
        scale: [base.scale9, base.scale11],
        jacobian,
    })
}

/// Solves the singular-path relations for the optimal steady state and
/// recovers the efforts that hold it.
pub fn solve_optimal(
    params: &ModelParams,
    econ: &EconParams,
    guess: Option<State>,
) -> Result<OptimalPolicy> {
    solve_optimal_with(params, econ, guess, Exec::default())
}

pub fn solve_optimal_with(
    params: &ModelParams,
    econ: &EconParams,
    guess: Option<State>,
    exec: Exec,
) -> Result<OptimalPolicy> {
    params.validate()?;
    econ.validate()?;
    let opts = NewtonOptions::default();
    let solve_one = |s: Vec2| newton::solve(|v| singular_system(params, econ, v), s, &opts);
    let admissible = |v: Vec2| v[0] > 0.0 && v[1] > 0.0;

    if let Some(g) = guess {
        if let Ok(sol) = solve_one(g.as_array()) {
            if admissible(sol.root) {
                if let Ok(policy) = policy_at(params, econ, State::from_array(sol.root)) {
                    return Ok(policy);
                }
            }
        }
    }

    let outcome = newton::multistart(&equilibria::interior_starts(params), exec, solve_one);
    let mut roots: Vec<State> = outcome
        .roots
        .iter()
        .filter(|s| admissible(s.root))
        .map(|s| State::from_array(s.root))
        .collect();
    roots.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut first_error = None;
    for root in roots {
        match policy_at(params, econ, root) {
            Ok(policy) => return Ok(policy),
            Err(err) => {
                log::warn!("optimal candidate {root:?} rejected: {err}");
                first_error.get_or_insert(err);
            }
        }
    }
    Err(first_error.unwrap_or_else(|| {
        outcome
            .last_error
            .unwrap_or_else(|| Error::NoConvergence("no positive optimal steady state".into()))
    }))
}

fn policy_at(params: &ModelParams, econ: &EconParams, state: State) -> Result<OptimalPolicy> {
    let res = optimal_singular_residuals(params, econ, state)?;
    let (e1, e2) = efforts_for_state(params, state)?;
    if e1 < 0.0 || e2 < 0.0 {
        return Err(Error::NegativeEffort { e1, e2 });
    }
    Ok(OptimalPolicy {
        x_opt: state.x,
        y_opt: state.y,
        e1_opt: e1,
        e2_opt: e2,
        residual_9: res.r9,
        residual_11: res.r11,
        relative_residual: res.relative(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model;
    use crate::presets;

    fn setup() -> (ModelParams, EconParams) {
        (presets::refuge_family(0.02), presets::optimal_econ())
    }

    #[test]
    fn revenue_examples() {
        let (params, econ) = setup();
        let closed = revenue(
            &econ,
            &params.with_efforts(0.0, 0.0),
            State::new(300.0, 40.0),
        );
        assert_eq!(closed.pi, 0.0);

        let x0 = econ.prey_break_even(&params);
        let rep = revenue(&econ, &params.with_efforts(7.3, 1.0), State::new(x0, 5.0));
        assert!(rep.pi_x.abs() < 1e-12);

        let rep = revenue(
            &econ,
            &params.with_efforts(1.8534, 5.8875),
            State::new(188.5858, 30.6567),
        );
        assert!((rep.pi_x - 137.97).abs() / 137.97 < 2e-4, "{}", rep.pi_x);
        assert!((rep.pi_y - 313.13).abs() / 313.13 < 2e-4, "{}", rep.pi_y);
        assert_eq!(rep.pi, rep.pi_x + rep.pi_y);
    }

    #[test]
    fn case_four_break_even_levels() {
        let (params, econ) = setup();
        let cases = bionomic_equilibrium(&params, &econ).unwrap();
        let iv = cases
            .iter()
            .find(|c| c.case_id == BionomicCase::IV)
            .unwrap();
        let (x, y) = (iv.x_inf.unwrap(), iv.y_inf.unwrap());
        assert_eq!(x, 2.5);
        assert!((y - 1.0 / 0.9).abs() < 1e-15);
        assert_eq!(econ.p1 * params.q1 * x, econ.c1);

        let induced = params.with_efforts(iv.e1_inf, iv.e2_inf);
        let f = model::rhs(&induced, State::new(x, y)).unwrap();
        assert!(f[0].abs() < 1e-10 && f[1].abs() < 1e-10, "{f:?}");
        assert!(revenue(&econ, &induced, State::new(x, y)).pi.abs() < 1e-12);
    }

    #[test]
    fn case_four_conditions_match_effort_signs() {
        // (ii) is exactly the positivity of the predator effort; the
        // effort-sign check guards existence independently of (i)
        let (params, econ) = setup();
        for m in [0.0, 0.02, 0.2, 0.5] {
            for d in [0.04, 0.5, 5.0] {
                let pr = ModelParams {
                    d,
                    ..params.with_m(m)
                };
                let iv = bionomic_equilibrium(&pr, &econ).unwrap().remove(3);
                assert!(!iv.exists || (iv.e1_inf > 0.0 && iv.e2_inf > 0.0));
                assert_eq!(iv.conditions[1].holds, iv.e2_inf > 0.0, "m={m} d={d}");
            }
        }
    }

    #[test]
    fn case_one_identities_and_premise() {
        let (params, econ) = setup();
        let i = bionomic_equilibrium(&params, &econ).unwrap().remove(0);
        assert_eq!(i.e2_inf, 0.0);
        let x = i.x_inf.unwrap();
        assert_eq!(econ.p1 * params.q1 * x, econ.c1);
        if let Some(y) = i.y_inf {
            let induced = params.with_efforts(i.e1_inf, 0.0);
            let f = model::rhs(&induced, State::new(x, y)).unwrap();
            assert!(f[0].abs() < 1e-9 && f[1].abs() < 1e-9, "{f:?}");
            let premise = econ.p2 * params.q2 * y < econ.c2;
            assert_eq!(i.conditions[0].holds, premise);
            if !premise {
                assert!(!i.exists);
            }
        }
        // expensive predator fishing makes the premise hold
        let dear = EconParams { c2: 1e6, ..econ };
        let i = bionomic_equilibrium(&params, &dear).unwrap().remove(0);
        assert!(i.conditions[0].holds || i.y_inf.is_none());
    }

    #[test]
    fn case_two_identities() {
        let (params, econ) = setup();
        let econ = EconParams { c1: 1e4, ..econ };
        let ii = bionomic_equilibrium(&params, &econ).unwrap().remove(1);
        assert_eq!(ii.e1_inf, 0.0);
        let y = ii.y_inf.unwrap();
        assert_eq!(econ.p2 * params.q2 * y, econ.c2);
        let x = ii.x_inf.unwrap();
        let f = model::rhs(&params.with_efforts(0.0, ii.e2_inf), State::new(x, y)).unwrap();
        assert!(f[0].abs() < 1e-9 && f[1].abs() < 1e-9, "{f:?}");
        assert!(ii.conditions[0].holds);
    }

    #[test]
    fn case_three_never_exists() {
        let (params, econ) = setup();
        let dear = EconParams {
            c1: 1e6,
            c2: 1e6,
            ..econ
        };
        let iii = bionomic_equilibrium(&params, &dear).unwrap().remove(2);
        assert!(!iii.exists);
        assert!(iii.conditions.iter().all(|c| c.holds));
        assert_eq!((iii.e1_inf, iii.e2_inf), (0.0, 0.0));
    }

    #[test]
    fn shadow_price_examples() {
        let (params, econ) = setup();
        let s = shadow_prices(&econ, &params, State::new(188.5858, 30.6567)).unwrap();
        assert!((s.lambda1_scaled - (2.0 - 1.0 / (0.2 * 188.5858))).abs() < 1e-15);
        assert!((s.lambda1_scaled - 1.9735).abs() < 1e-4);
        let z = shadow_prices(
            &econ,
            &params,
            State::new(
                econ.prey_break_even(&params),
                econ.predator_break_even(&params),
            ),
        )
        .unwrap();
        assert!(z.lambda1_scaled.abs() < 1e-15 && z.lambda2_scaled.abs() < 1e-15);
        assert!(matches!(
            shadow_prices(&econ, &params, State::new(0.0, 1.0)),
            Err(Error::ZeroBiomass { .. })
        ));
    }

    #[test]
    fn efforts_make_the_state_stationary() {
        let params = presets::refuge_family(0.02);
        for (x, y) in [(50.0, 10.0), (188.0, 30.0), (400.0, 2.0)] {
            let s = State::new(x, y);
            let (e1, e2) = efforts_for_state(&params, s).unwrap();
            let f = model::rhs(&params.with_efforts(e1, e2), s).unwrap();
            assert!(
                f[0].abs() < 1e-10 * x && f[1].abs() < 1e-10 * x.max(y),
                "{f:?}"
            );
        }
    }

    #[test]
    fn residuals_match_independent_transcription() {
        let (params, econ) = setup();
        let (x, y) = (123.4, 17.9);
        let res = optimal_singular_residuals(&params, &econ, State::new(x, y)).unwrap();
        // written out flat, without shared subexpressions
        let (r, k, p, a, m, d, e, q1, q2) = (3.0, 500.0, 0.2, 0.008, 0.02, 0.04, 0.15, 0.2, 0.6);
        let (p1, p2, c1, c2, dl) = (2.0, 3.0, 1.0, 2.0, 0.004);
        let dd = 1.0 + a * x * (1.0 - m * y);
        let r9 = dl * (p1 - c1 / (q1 * x))
            - p1 * (r * (1.0 - x / k) - p * y * (1.0 - m * y) / dd)
            - (p2 - c2 / (q2 * y)) * e * p * y * (1.0 - m * y) / (dd * dd)
            - (p1 - c1 / (q1 * x))
                * (-r * x / k + p * a * x * y * (1.0 - m * y) * (1.0 - m * y) / (dd * dd));
        let r11 = dl * (p2 - c2 / (q2 * y))
            - p2 * (e * p * x * (1.0 - m * y) / dd - d)
            - p * x
                * (p1 - c1 / (q1 * x))
                * (a * x * (1.0 - m * y) * (1.0 - m * y) + 1.0 - 2.0 * m * y)
                / (dd * dd)
            + (p2 - c2 / (q2 * y)) * e * p * m * x * y / (dd * dd);
        assert!((res.r9 - r9).abs() <= 1e-12 * r9.abs());
        assert!((res.r11 - r11).abs() <= 1e-12 * r11.abs());
    }

    #[test]
    fn optimal_solution_is_consistent() {
        let (params, econ) = setup();
        let policy = solve_optimal(&params, &econ, None).unwrap();
        assert!(
            (policy.x_opt - 188.5858).abs() / 188.5858 < 1e-3,
            "{policy:?}"
        );
        assert!(
            (policy.y_opt - 30.6567).abs() / 30.6567 < 1e-3,
            "{policy:?}"
        );
        assert!((policy.e1_opt - 1.8534).abs() / 1.8534 < 1e-3);
        assert!(policy.relative_residual <= 1e-10);
        assert!(policy.e1_opt >= 0.0 && policy.e2_opt >= 0.0);

        let induced = params.with_efforts(policy.e1_opt, policy.e2_opt);
        let f = model::rhs(&induced, State::new(policy.x_opt, policy.y_opt)).unwrap();
        assert!(f[0].abs() <= 1e-9 * policy.x_opt && f[1].abs() <= 1e-9 * policy.x_opt);

        let guessed = solve_optimal(&params, &econ, Some(State::new(180.0, 28.0))).unwrap();
        assert!((guessed.x_opt - policy.x_opt).abs() < 1e-8 * policy.x_opt);
    }

    #[test]
    fn absurd_guess_recovers_or_fails_cleanly() {
        let (params, econ) = setup();
        match solve_optimal(&params, &econ, Some(State::new(-1e9, 1e9))) {
            Ok(p) => assert!(p.relative_residual <= 1e-10),
            Err(e) => assert!(matches!(
                e,
                Error::NoConvergence(_) | Error::NegativeEffort { .. }
            )),
        }
    }
}
