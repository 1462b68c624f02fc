//! Model parameters, the vector field and its derivatives.

use serde::{Deserialize, Serialize};

use crate::econ::EconParams;
use crate::simulate::Trajectory;
use crate::{Error, Result};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

/// The eleven constants of the harvested refuge model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Intrinsic prey growth rate.
    pub r: f64,
    /// Prey carrying capacity.
    pub k: f64,
    /// Maximum per-capita consumption rate.
    pub p: f64,
    /// Handling-time coefficient of the response denominator.
    pub a: f64,
    /// Refuge coefficient, in `[0, 1]`.
    pub m: f64,
    /// Predator death rate.
    pub d: f64,
    /// Conversion efficiency, in `(0, 1)`.
    pub e: f64,
    pub q1: f64,
    pub q2: f64,
    /// Prey harvesting effort.
    #[serde(rename = "E1")]
    pub effort1: f64,
    /// Predator harvesting effort.
    #[serde(rename = "E2")]
    pub effort2: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("r", self.r),
            ("k", self.k),
            ("p", self.p),
            ("a", self.a),
            ("d", self.d),
            ("q1", self.q1),
            ("q2", self.q2),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(
                    name,
                    format!("must be positive and finite, got {value}"),
                ));
            }
        }
        if !(self.e > 0.0 && self.e < 1.0) {
            return Err(invalid("e", format!("must lie in (0, 1), got {}", self.e)));
        }
        if !(0.0..=1.0).contains(&self.m) {
            return Err(invalid("m", format!("must lie in [0, 1], got {}", self.m)));
        }
        if !(self.effort1.is_finite() && self.effort1 >= 0.0) {
            return Err(invalid(
                "E1",
                format!("must be nonnegative, got {}", self.effort1),
            ));
        }
        if !(self.effort2.is_finite() && self.effort2 >= 0.0) {
            return Err(invalid(
                "E2",
                format!("must be nonnegative, got {}", self.effort2),
            ));
        }
        Ok(())
    }

    pub fn with_m(self, m: f64) -> Self {
        Self { m, ..self }
    }

    pub fn with_efforts(self, effort1: f64, effort2: f64) -> Self {
        Self {
            effort1,
            effort2,
            ..self
        }
    }

    /// Per-capita prey harvest rate `q1 E1`.
    pub fn prey_harvest(&self) -> f64 {
        self.q1 * self.effort1
    }

    /// Per-capita predator loss `d + q2 E2`.
    pub fn predator_loss(&self) -> f64 {
        self.d + self.q2 * self.effort2
    }

    /// `1 + a x (1 - m y)`, unchecked.
    pub fn denominator(&self, state: State) -> f64 {
        1.0 + self.a * state.x * (1.0 - self.m * state.y)
    }

    pub(crate) fn checked_denominator(&self, state: State) -> Result<f64> {
        let value = self.denominator(state);
        if value > 0.0 && value.is_finite() {
            Ok(value)
        } else {
            Err(Error::InvalidDenominator {
                x: state.x,
                y: state.y,
                value,
            })
        }
    }
}

fn invalid(name: &'static str, reason: String) -> Error {
    Error::InvalidParameter { name, reason }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
}

impl State {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm_inf(&self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    pub fn as_array(&self) -> Vec2 {
        [self.x, self.y]
    }

    pub fn from_array(v: Vec2) -> Self {
        Self { x: v[0], y: v[1] }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.x >= 0.0 && self.y >= 0.0
    }
}

/// Evaluates `(dx/dt, dy/dt)`.
pub fn rhs(params: &ModelParams, state: State) -> Result<Vec2> {
    let den = params.checked_denominator(state)?;
    Ok(rhs_with_denominator(params, state, den))
}

#[inline]
pub(crate) fn rhs_with_denominator(params: &ModelParams, state: State, den: f64) -> Vec2 {
    let State { x, y } = state;
    let predation = params.p * (1.0 - params.m * y) * x * y / den;
    [
        params.r * x * (1.0 - x / params.k) - predation - params.q1 * params.effort1 * x,
        params.e * predation - params.d * y - params.q2 * params.effort2 * y,
    ]
}

/// Closed-form Jacobian of the vector field.
pub fn jacobian(params: &ModelParams, state: State) -> Result<Mat2> {
    let den = params.checked_denominator(state)?;
    let State { x, y } = state;
    let ModelParams {
        r, k, p, a, m, e, ..
    } = *params;
    let u = 1.0 - m * y;
    let den2 = den * den;
    // d/dy of u*x*y/den, times den^2 / x
    let cross = a * x * u * u + 1.0 - 2.0 * m * y;
    Ok([
        [
            r - 2.0 * r * x / k - params.prey_harvest() - p * y * u / den2,
            -p * x * cross / den2,
        ],
        [
            e * p * y * u / den2,
            -params.predator_loss() + e * p * x * cross / den2,
        ],
    ])
}

/// Normalised partial derivatives of the vector field at a point:
/// `a_ij = (1/(i! j!)) d^(i+j) F1 / dx^i dy^j`, likewise `b_ij` for `F2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoefficients {
    pub a10: f64,
    pub a01: f64,
    pub a20: f64,
    pub a11: f64,
    pub a02: f64,
    pub a30: f64,
    pub a21: f64,
    pub a12: f64,
    pub a03: f64,
    pub b10: f64,
    pub b01: f64,
    pub b20: f64,
    pub b11: f64,
    pub b02: f64,
    pub b30: f64,
    pub b21: f64,
    pub b12: f64,
    pub b03: f64,
    /// `a10 b01 - a01 b10`.
    pub delta: f64,
}

impl TaylorCoefficients {
    /// `(name, value)` pairs in a fixed order, `delta` excluded.
    pub fn entries(&self) -> [(&'static str, f64); 18] {
        [
            ("a10", self.a10),
            ("a01", self.a01),
            ("a20", self.a20),
            ("a11", self.a11),
            ("a02", self.a02),
            ("a30", self.a30),
            ("a21", self.a21),
            ("a12", self.a12),
            ("a03", self.a03),
            ("b10", self.b10),
            ("b01", self.b01),
            ("b20", self.b20),
            ("b11", self.b11),
            ("b02", self.b02),
            ("b30", self.b30),
            ("b21", self.b21),
            ("b12", self.b12),
            ("b03", self.b03),
        ]
    }

    /// Builds coefficients from a list of entries (e.g. a numerical oracle).
    /// Missing names default to zero; `delta` is recomputed.
    pub fn from_entries(entries: &[(&str, f64)]) -> Self {
        let get = |name: &str| {
            entries
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| *v)
                .unwrap_or(0.0)
        };
        let mut c = TaylorCoefficients {
            a10: get("a10"),
            a01: get("a01"),
            a20: get("a20"),
            a11: get("a11"),
            a02: get("a02"),
            a30: get("a30"),
            a21: get("a21"),
            a12: get("a12"),
            a03: get("a03"),
            b10: get("b10"),
            b01: get("b01"),
            b20: get("b20"),
            b11: get("b11"),
            b02: get("b02"),
            b30: get("b30"),
            b21: get("b21"),
            b12: get("b12"),
            b03: get("b03"),
            delta: 0.0,
        };
        c.delta = c.a10 * c.b01 - c.a01 * c.b10;
        c
    }
}

/// Closed-form Taylor coefficients up to third order.
///
/// The predator coefficients of order two and above are `-e` times the
/// predation part of the prey coefficients, since the logistic and harvest
/// terms contribute only to `a10`, `a20` and the linear part.
pub fn taylor_coefficients(params: &ModelParams, at: State) -> Result<TaylorCoefficients> {
    let j = jacobian(params, at)?;
    let den = params.checked_denominator(at)?;
    let State { x, y } = at;
    let ModelParams {
        r, k, p, a, m, e, ..
    } = *params;
    let u = 1.0 - m * y;
    let den3 = den * den * den;
    let den4 = den3 * den;

    // Coefficients of the predation term -p*u*x*y/den.
    let g20 = p * a * u * u * y / den3;
    let g11 = -p * (1.0 - 2.0 * m * y + a * x * u) / den3;
    let g02 = p * m * x * (1.0 + a * x) / den3;
    let g30 = -p * a * a * u * u * u * y / den4;
    let g21 = p * a * (m * y - 1.0) * (a * m * x * y - a * x + 3.0 * m * y - 1.0) / den4;
    let g12 = p * m * (a * a * m * x * x * y - a * a * x * x + 2.0 * a * m * x * y + 1.0) / den4;
    let g03 = p * a * m * m * x * x * (1.0 + a * x) / den4;

    let (a10, a01, b10, b01) = (j[0][0], j[0][1], j[1][0], j[1][1]);
    Ok(TaylorCoefficients {
        a10,
        a01,
        a20: -r / k + g20,
        a11: g11,
        a02: g02,
        a30: g30,
        a21: g21,
        a12: g12,
        a03: g03,
        b10,
        b01,
        b20: -e * g20,
        b11: -e * g11,
        b02: -e * g02,
        b30: -e * g30,
        b21: -e * g21,
        b12: -e * g12,
        b03: -e * g03,
        delta: a10 * b01 - a01 * b10,
    })
}

/// Ultimate bound on `xi = x + y/e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    /// `d + q2 E2`.
    pub zeta: f64,
    /// `(k / 4r) (r + zeta - q1 E1)^2`.
    pub kappa: f64,
    /// `kappa / zeta`: limsup of `xi(t)`.
    pub ultimate: f64,
}

pub fn ultimate_bound(params: &ModelParams) -> Bound {
    let zeta = params.predator_loss();
    let growth = params.r + zeta - params.prey_harvest();
    let kappa = params.k / (4.0 * params.r) * growth * growth;
    Bound {
        zeta,
        kappa,
        ultimate: kappa / zeta,
    }
}

/// `xi = x + y/e`, the quantity controlled by [`ultimate_bound`].
pub fn weighted_biomass(params: &ModelParams, state: State) -> f64 {
    state.x + state.y / params.e
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PersistenceReport {
    /// Prey can invade the empty state: `r > q1 E1`.
    pub growth_condition: bool,
    /// Predator can invade the prey-only state.
    pub consumption_condition: bool,
    pub permanent: bool,
}

/// Boundary invasion conditions. The growth condition is the existence of
/// weights `rho1, rho2 > 0` with `rho1 r > rho1 q1 E1 + rho2 (d + q2 E2)`,
/// which reduces to `r > q1 E1`.
pub fn persistence_check(params: &ModelParams) -> PersistenceReport {
    let growth_condition = params.r > params.prey_harvest();
    let consumption_condition = growth_condition && {
        let axial_fraction = 1.0 - params.prey_harvest() / params.r;
        let threshold =
            params.predator_loss() / params.e * (params.a + 1.0 / (params.k * axial_fraction));
        params.p > threshold
    };
    PersistenceReport {
        growth_condition,
        consumption_condition,
        permanent: growth_condition && consumption_condition,
    }
}

/// Present value of the net revenue stream along a trajectory, by the
/// trapezoidal rule. Efforts are taken from `params`.
pub fn discounted_revenue(
    trajectory: &Trajectory,
    params: &ModelParams,
    econ: &EconParams,
) -> Result<f64> {
    let (times, states) = (&trajectory.times, &trajectory.states);
    if times.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let integrand = |t: f64, s: State| {
        let rent = (econ.p1 * params.q1 * s.x - econ.c1) * params.effort1
            + (econ.p2 * params.q2 * s.y - econ.c2) * params.effort2;
        (-econ.delta * t).exp() * rent
    };
    let mut total = 0.0;
    let mut prev = integrand(times[0], states[0]);
    for i in 1..times.len() {
        let cur = integrand(times[i], states[i]);
        total += 0.5 * (times[i] - times[i - 1]) * (prev + cur);
        prev = cur;
    }
    Ok(total)
}
