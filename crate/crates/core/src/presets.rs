//! Reference parameter sets used by the examples, fixtures and tests.

use crate::econ::EconParams;
use crate::model::ModelParams;

/// The harvested refuge family with the refuge coefficient left free:
/// r=3, a=0.008, d=0.04, p=0.2, q1=0.2, q2=0.6, E1=2, E2=2, k=500, e=0.15.
pub fn refuge_family(m: f64) -> ModelParams {
    ModelParams {
        r: 3.0,
        k: 500.0,
        p: 0.2,
        a: 0.008,
        m,
        d: 0.04,
        e: 0.15,
        q1: 0.2,
        q2: 0.6,
        effort1: 2.0,
        effort2: 2.0,
    }
}

/// Over-harvested prey (E1 > r/q1): the origin attracts.
pub fn extinction_set() -> ModelParams {
    ModelParams {
        r: 1.0,
        k: 200.0,
        p: 0.2,
        a: 0.04,
        m: 0.5,
        d: 0.5,
        e: 0.25,
        q1: 0.4,
        q2: 0.6,
        effort1: 3.0,
        effort2: 1.0,
    }
}

/// Same as [`extinction_set`] with r=3, q1=0.2: the prey-only state attracts.
pub fn prey_only_set() -> ModelParams {
    ModelParams {
        r: 3.0,
        q1: 0.2,
        ..extinction_set()
    }
}

/// Prices, costs and discount rate paired with `refuge_family(0.02)`.
pub fn optimal_econ() -> EconParams {
    EconParams {
        p1: 2.0,
        p2: 3.0,
        c1: 1.0,
        c2: 2.0,
        delta: 0.004,
    }
}
