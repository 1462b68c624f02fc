use thiserror::Error;

use crate::equilibria::EquilibriumKind;
use crate::simulate::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("response denominator 1 + a*x*(1 - m*y) = {value} is not positive at ({x}, {y})")]
    InvalidDenominator { x: f64, y: f64, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("axial equilibrium infeasible: r = {r} <= q1*E1 = {harvest}")]
    Infeasible { r: f64, harvest: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("roots found only outside the open positive quadrant")]
    NoPositiveRoot,

    #[error("expected a {expected:?} equilibrium, got {found:?}")]
    WrongKind {
        expected: EquilibriumKind,
        found: EquilibriumKind,
    },

    #[error("both axial eigenvalues vanish at the critical growth rate")]
    DoubleZeroEigenvalue,

    #[error("no feasible interior equilibrium for m in [{m_lo}, {m_hi}]")]
    NoInteriorBranch { m_lo: f64, m_hi: f64 },

    #[error("not at a Hopf point: |trace| = {trace:e} exceeds {tolerance:e}")]
    NotAtHopfPoint { trace: f64, tolerance: f64 },

    #[error("linear determinant {0:e} is not positive; Lyapunov number undefined")]
    NegativeDelta(f64),

    #[error("biomass must be positive, got ({x}, {y})")]
    ZeroBiomass { x: f64, y: f64 },

    #[error("optimal steady state needs a negative effort (E1 = {e1}, E2 = {e2})")]
    NegativeEffort { e1: f64, e2: f64 },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("initial state ({x}, {y}) has a negative component")]
    NegativeInitialState { x: f64, y: f64 },

    #[error("step size underflow at t = {t} (h = {step:e})")]
    StepFailure {
        t: f64,
        step: f64,
        partial: Box<Trajectory>,
    },

    #[error("trajectory spans {span} time units, at least {required} required")]
    TooShort { span: f64, required: f64 },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}
