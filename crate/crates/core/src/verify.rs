//! Randomized invariant suites and finite-difference oracles.
//!
//! Every suite draws its cases from a seeded ChaCha stream before any
//! evaluation, so reports are identical across execution strategies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bifurcation;
use crate::econ;
use crate::model::{self, Mat2, ModelParams, State, TaylorCoefficients};
use crate::simulate::{self, SimConfig};
use crate::Exec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest error over the cases, in units of the tolerance.
    pub worst_ratio: f64,
    pub passed: bool,
}

impl SuiteReport {
    fn from_ratios(name: &str, ratios: &[f64]) -> Self {
        let failures = ratios.iter().filter(|r| !(**r <= 1.0)).count();
        let worst_ratio = ratios.iter().fold(0.0f64, |acc, r| {
            if r.is_nan() {
                f64::INFINITY
            } else {
                acc.max(*r)
            }
        });
        Self {
            name: name.to_string(),
            cases: ratios.len(),
            failures,
            worst_ratio,
            passed: failures == 0,
        }
    }
}

/// Central-difference Jacobian with step `1e-6 max(1, |c|)` per coordinate.
pub fn finite_difference_jacobian(params: &ModelParams, s: State) -> Option<Mat2> {
    let mut out = [[0.0; 2]; 2];
    for col in 0..2 {
        let mut v = s.as_array();
        let h = 1e-6 * v[col].abs().max(1.0);
        v[col] += h;
        let plus = model::rhs(params, State::from_array(v)).ok()?;
        v[col] -= 2.0 * h;
        let minus = model::rhs(params, State::from_array(v)).ok()?;
        for row in 0..2 {
            out[row][col] = (plus[row] - minus[row]) / (2.0 * h);
        }
    }
    Some(out)
}

// Five-point central weights at offsets -2..=2 for derivative orders 0..=3,
// with the power of h each one divides by.
const STENCILS: [([f64; 5], f64, i32); 4] = [
    ([0.0, 0.0, 1.0, 0.0, 0.0], 1.0, 0),
    ([1.0, -8.0, 0.0, 8.0, -1.0], 12.0, 1),
    ([-1.0, 16.0, -30.0, 16.0, -1.0], 12.0, 2),
    ([-1.0, 2.0, 0.0, -2.0, 1.0], 2.0, 3),
];

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product::<f64>().max(1.0)
}

fn mixed_derivative(
    params: &ModelParams,
    s: State,
    comp: usize,
    (i, j): (usize, usize),
    (hx, hy): (f64, f64),
) -> Option<f64> {
    let (wx, nx, px) = STENCILS[i];
    let (wy, ny, py) = STENCILS[j];
    let mut acc = 0.0;
    for (a, &cx) in wx.iter().enumerate() {
        if cx == 0.0 {
            continue;
        }
        for (b, &cy) in wy.iter().enumerate() {
            if cy == 0.0 {
                continue;
            }
            let point = State::new(s.x + (a as f64 - 2.0) * hx, s.y + (b as f64 - 2.0) * hy);
            acc += cx * cy * model::rhs(params, point).ok()?[comp];
        }
    }
    Some(acc / (nx * ny * hx.powi(px) * hy.powi(py)))
}

/// Taylor coefficients by tensor-product stencils with one Richardson step.
/// Steps are `rel_step * max(1, |c|)` per coordinate.
pub fn finite_difference_coefficients(
    params: &ModelParams,
    s: State,
    rel_step: f64,
) -> Option<TaylorCoefficients> {
    let h = (rel_step * s.x.abs().max(1.0), rel_step * s.y.abs().max(1.0));
    let names_a = [
        "a10", "a01", "a20", "a11", "a02", "a30", "a21", "a12", "a03",
    ];
    let names_b = [
        "b10", "b01", "b20", "b11", "b02", "b30", "b21", "b12", "b03",
    ];
    let orders = [
        (1, 0),
        (0, 1),
        (2, 0),
        (1, 1),
        (0, 2),
        (3, 0),
        (2, 1),
        (1, 2),
        (0, 3),
    ];
    let mut entries = Vec::with_capacity(18);
    for (comp, names) in [(0, names_a), (1, names_b)] {
        for (name, &order) in names.iter().zip(&orders) {
            let coarse = mixed_derivative(params, s, comp, order, h)?;
            let fine = mixed_derivative(params, s, comp, order, (h.0 / 2.0, h.1 / 2.0))?;
            let value = (4.0 * fine - coarse) / 3.0;
            entries.push((*name, value / (factorial(order.0) * factorial(order.1))));
        }
    }
    Some(TaylorCoefficients::from_entries(&entries))
}

/// Parameters drawn from broad admissible ranges, with prey persistence.
pub fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    let r = rng.gen_range(0.5..5.0);
    let q1 = rng.gen_range(0.05..1.0);
    ModelParams {
        r,
        k: rng.gen_range(50.0..1000.0),
        p: rng.gen_range(0.05..0.5),
        a: rng.gen_range(0.001..0.05),
        m: rng.gen_range(0.0..0.1),
        d: rng.gen_range(0.01..0.5),
        e: rng.gen_range(0.05..0.9),
        q1,
        q2: rng.gen_range(0.05..1.0),
        effort1: rng.gen_range(0.0..0.9 * r / q1),
        effort2: rng.gen_range(0.0..3.0),
    }
}

/// A positive state with `D >= 0.1` for the given parameters.
pub fn random_state(rng: &mut ChaCha8Rng, params: &ModelParams) -> State {
    let y_hi = if params.m > 0.0 {
        (0.9 / params.m).min(params.k)
    } else {
        params.k
    };
    loop {
        let s = State::new(rng.gen_range(0.1..params.k), rng.gen_range(0.01..y_hi));
        if params.denominator(s) >= 0.1 {
            return s;
        }
    }
}

fn draws(rng: &mut ChaCha8Rng, n: usize) -> Vec<(ModelParams, State)> {
    (0..n)
        .map(|_| {
            let p = random_params(rng);
            let s = random_state(rng, &p);
            (p, s)
        })
        .collect()
}

pub const JACOBIAN_TOL: f64 = 1e-6;
pub const TAYLOR_REL_TOL: f64 = 1e-4;
pub const TAYLOR_ABS_TOL: f64 = 1e-8;
pub const TRANSCRITICAL_TOL: f64 = 1e-10;
pub const EFFORT_TOL: f64 = 1e-10;

pub fn jacobian_suite(cases: &[(ModelParams, State)], exec: Exec) -> SuiteReport {
    let ratios = exec.map(cases, |(p, s)| {
        let (Ok(j), Some(fd)) = (model::jacobian(p, *s), finite_difference_jacobian(p, *s)) else {
            return f64::INFINITY;
        };
        let scale = j.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                let tol = JACOBIAN_TOL * fd[r][c].abs().max(1e-3 * scale);
                worst = worst.max((j[r][c] - fd[r][c]).abs() / tol);
            }
        }
        worst
    });
    SuiteReport::from_ratios("jacobian_vs_finite_differences", &ratios)
}

pub fn taylor_suite(cases: &[(ModelParams, State)], exec: Exec) -> SuiteReport {
    let ratios = exec.map(cases, |(p, s)| {
        let (Ok(exact), Some(fd)) = (
            model::taylor_coefficients(p, *s),
            finite_difference_coefficients(p, *s, 1e-2),
        ) else {
            return f64::INFINITY;
        };
        exact
            .entries()
            .iter()
            .zip(fd.entries())
            .map(|((_, a), (_, b))| (a - b).abs() / (TAYLOR_REL_TOL * a.abs() + TAYLOR_ABS_TOL))
            .fold(0.0, f64::max)
    });
    SuiteReport::from_ratios("taylor_coefficients_vs_stencils", &ratios)
}

pub fn transcritical_suite(params: &[ModelParams], exec: Exec) -> SuiteReport {
    let ratios = exec.map(params, |p| match bifurcation::transcritical_check(p) {
        Ok(rep) => rep.s1.abs() / TRANSCRITICAL_TOL,
        // no prey harvest means no critical growth rate: vacuous
        Err(_) if p.effort1 == 0.0 => 0.0,
        Err(_) => f64::INFINITY,
    });
    SuiteReport::from_ratios("transcritical_s1_vanishes", &ratios)
}

pub fn effort_suite(cases: &[(ModelParams, State)], exec: Exec) -> SuiteReport {
    let ratios = exec.map(cases, |(p, s)| {
        let Ok((e1, e2)) = econ::efforts_for_state(p, *s) else {
            return f64::INFINITY;
        };
        let induced = ModelParams {
            effort1: e1,
            effort2: e2,
            ..*p
        };
        let Ok(f) = model::rhs(&induced, *s) else {
            return f64::INFINITY;
        };
        f[0].abs().max(f[1].abs()) / (EFFORT_TOL * (1.0 + s.norm_inf()))
    });
    SuiteReport::from_ratios("effort_formulas_zero_the_field", &ratios)
}

/// Simulates from random nonnegative starts and checks the ultimate bound
/// together with positivity.
pub fn bound_suite(cases: &[(ModelParams, State)], exec: Exec) -> SuiteReport {
    let config = SimConfig::new(100.0);
    let ratios = exec.map(cases, |(p, s)| match simulate::integrate(p, *s, &config) {
        Ok(traj) => {
            let positive = traj.states.iter().all(State::is_nonnegative);
            if simulate::verify_bound(&traj) && positive {
                0.0
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::INFINITY,
    });
    SuiteReport::from_ratios("ultimate_bound_and_positivity", &ratios)
}

/// Case counts for [`run_property_suites`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteSizes {
    pub jacobian: usize,
    pub taylor: usize,
    pub transcritical: usize,
    pub effort: usize,
    pub bound: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        Self {
            jacobian: 200,
            taylor: 50,
            transcritical: 100,
            effort: 100,
            bound: 20,
        }
    }
}

pub fn run_property_suites(seed: u64, sizes: SuiteSizes, exec: Exec) -> Vec<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jac = draws(&mut rng, sizes.jacobian);
    let tay = draws(&mut rng, sizes.taylor);
    let tc: Vec<ModelParams> = (0..sizes.transcritical)
        .map(|_| random_params(&mut rng))
        .collect();
    let eff = draws(&mut rng, sizes.effort);
    let bnd = draws(&mut rng, sizes.bound);
    vec![
        jacobian_suite(&jac, exec),
        taylor_suite(&tay, exec),
        transcritical_suite(&tc, exec),
        effort_suite(&eff, exec),
        bound_suite(&bnd, exec),
    ]
}
