//! Numerical toolkit for a harvested predator–prey system with a Holling
//! type-II response and a prey refuge proportional to both species:
//!
//! ```text
//! dx/dt = r x (1 - x/k) - p (1 - m y) x y / (1 + a x (1 - m y)) - q1 E1 x
//! dy/dt = e p (1 - m y) x y / (1 + a x (1 - m y)) - d y - q2 E2 y
//! ```
//!
//! The crate is organised by analysis:
//!
//! - [`model`]: parameters, vector field, Jacobian, Taylor coefficients,
//!   boundedness and persistence diagnostics.
//! - [`equilibria`]: the trivial, axial and interior steady states with
//!   eigenvalue classification and the sufficient stability conditions.
//! - [`bifurcation`]: transcritical check in `r` and Hopf detection in `m`
//!   including the first Lyapunov number.
//! - [`econ`]: revenue, bionomic equilibria and the optimal-harvest steady
//!   state.
//! - [`simulate`]: adaptive integration, limit-cycle detection and refuge
//!   sweeps.
//! - [`verify`]: randomized property suites backed by finite-difference
//!   oracles.
//!
//! Batch work (multistart root finding, random simulation batches, property
//! suites) runs through [`Exec`], which uses rayon when the `parallel`
//! feature is enabled and falls back to plain iteration otherwise.

// `!(x > 0.0)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod econ;
pub mod equilibria;
mod error;
mod exec;
pub mod integrator;
pub mod model;
pub mod newton;
pub mod presets;
pub mod simulate;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
pub use model::{ModelParams, State};

/// A named boolean condition, used for feasibility and existence reports.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Condition {
    pub name: String,
    pub holds: bool,
}

impl Condition {
    pub fn new(name: impl Into<String>, holds: bool) -> Self {
        Self {
            name: name.into(),
            holds,
        }
    }
}

/// Returns true when every condition in the list holds.
pub fn all_hold(conditions: &[Condition]) -> bool {
    conditions.iter().all(|c| c.holds)
}
