//! Independent numerical oracles for the closed-form analysis.

use num_complex::Complex64;

use bioeco_core::bifurcation::{first_lyapunov_number, hopf_scan, HopfVerdict};
use bioeco_core::model::{ModelParams, State, TaylorCoefficients};
use bioeco_core::verify::finite_difference_coefficients;
use bioeco_core::{equilibria, model, presets};

fn hopf_point(params: &ModelParams, lo: f64, hi: f64) -> (f64, State) {
    let scan = hopf_scan(params, lo, hi, 40).unwrap();
    assert_eq!(scan.roots.len(), 1);
    (scan.roots[0].m_h, scan.roots[0].equilibrium_at_mh)
}

/// Planar first Lyapunov coefficient from multilinear forms:
/// `l1 = Re(i g20 g11 + w g21) / (2 w^2)` with `<p, q> = 1`.
fn multilinear_l1(c: &TaylorCoefficients) -> f64 {
    let i = Complex64::i();
    let omega = (c.a10 * c.b01 - c.a01 * c.b10).sqrt();
    let q = [Complex64::new(c.a01, 0.0), i * omega - c.a10];
    let mut p = [c.b01 + i * omega, Complex64::new(-c.a01, 0.0)];
    let s = p[0].conj() * q[0] + p[1].conj() * q[1];
    p = [p[0] / s.conj(), p[1] / s.conj()];

    // second and third partials of each component
    let second = [
        [2.0 * c.a20, c.a11, 2.0 * c.a02],
        [2.0 * c.b20, c.b11, 2.0 * c.b02],
    ];
    let third = [
        [6.0 * c.a30, 2.0 * c.a21, 2.0 * c.a12, 6.0 * c.a03],
        [6.0 * c.b30, 2.0 * c.b21, 2.0 * c.b12, 6.0 * c.b03],
    ];
    let b = |u: [Complex64; 2], v: [Complex64; 2]| {
        let f = |d: [f64; 3]| {
            d[0] * u[0] * v[0] + d[1] * (u[0] * v[1] + u[1] * v[0]) + d[2] * u[1] * v[1]
        };
        [f(second[0]), f(second[1])]
    };
    let cubic = |u: [Complex64; 2], v: [Complex64; 2], w: [Complex64; 2]| {
        let f = |d: [f64; 4]| {
            d[0] * u[0] * v[0] * w[0]
                + d[1] * (u[0] * v[0] * w[1] + u[0] * v[1] * w[0] + u[1] * v[0] * w[0])
                + d[2] * (u[0] * v[1] * w[1] + u[1] * v[0] * w[1] + u[1] * v[1] * w[0])
                + d[3] * u[1] * v[1] * w[1]
        };
        [f(third[0]), f(third[1])]
    };
    let dot = |p: [Complex64; 2], v: [Complex64; 2]| p[0].conj() * v[0] + p[1].conj() * v[1];
    let qb = [q[0].conj(), q[1].conj()];
    let g20 = dot(p, b(q, q));
    let g11 = dot(p, b(q, qb));
    let g21 = dot(p, cubic(q, q, qb));
    (i * g20 * g11 + omega * g21).re / (2.0 * omega * omega)
}

#[test]
fn sigma_from_stencil_coefficients_agrees() {
    let params = presets::refuge_family(0.0);
    let (m_h, s) = hopf_point(&params, 0.001, 0.02);
    let p = params.with_m(m_h);
    let exact = first_lyapunov_number(&model::taylor_coefficients(&p, s).unwrap()).0;
    let fd = first_lyapunov_number(&finite_difference_coefficients(&p, s, 1e-2).unwrap()).0;
    assert!((exact - fd).abs() <= 1e-3 * exact.abs(), "{exact} vs {fd}");
}

#[test]
fn sigma_sign_matches_multilinear_coefficient() {
    let reference = presets::refuge_family(0.0);
    let other = ModelParams {
        r: 2.0,
        k: 400.0,
        p: 0.3,
        a: 0.01,
        m: 0.0,
        d: 0.05,
        e: 0.2,
        q1: 0.2,
        q2: 0.5,
        effort1: 1.0,
        effort2: 1.0,
    };
    for (params, lo, hi) in [(reference, 0.001, 0.02), (other, 0.005, 0.05)] {
        let (m_h, s) = hopf_point(&params, lo, hi);
        let p = params.with_m(m_h);
        let oracle = multilinear_l1(&finite_difference_coefficients(&p, s, 1e-2).unwrap());
        let sigma = first_lyapunov_number(&model::taylor_coefficients(&p, s).unwrap()).0;
        assert!(
            oracle.signum() == sigma.signum(),
            "m_h={m_h}: oracle {oracle:e}, sigma {sigma:e}"
        );
    }
}

#[test]
fn hopf_root_is_grid_independent() {
    let params = presets::refuge_family(0.0);
    let coarse = hopf_scan(&params, 0.001, 0.02, 20).unwrap().roots[0].m_h;
    let fine = hopf_scan(&params, 0.001, 0.02, 50).unwrap().roots[0].m_h;
    assert!((coarse - fine).abs() <= 1e-8, "{coarse} vs {fine}");
}

#[test]
fn hopf_root_invariants() {
    let scan = hopf_scan(&presets::refuge_family(0.0), 0.001, 0.02, 30).unwrap();
    for h in &scan.roots {
        let scale = h.coefficients.a10.abs() + h.coefficients.b01.abs();
        assert!(h.trace_at_mh.abs() <= 1e-10 * scale);
        assert!(h.det_at_mh > 0.0);
        assert_eq!(h.verdict == HopfVerdict::Supercritical, h.sigma < 0.0);
    }
}

#[test]
fn frozen_state_slope_is_partial_trace_derivative() {
    let params = presets::refuge_family(0.0);
    let (m_h, s) = hopf_point(&params, 0.001, 0.02);
    let trace = |m: f64| {
        let j = model::jacobian(&params.with_m(m), s).unwrap();
        j[0][0] + j[1][1]
    };
    let h = 1e-7;
    let partial = (trace(m_h + h) - trace(m_h - h)) / (2.0 * h);
    let printed = bioeco_core::bifurcation::frozen_state_trace_slope(&params.with_m(m_h), s);
    assert!(
        (printed + partial).abs() <= 1e-6 * partial.abs(),
        "{printed} vs {partial}"
    );
}

#[test]
fn interior_equilibrium_is_unique_along_table_values() {
    for m in [
        0.001, 0.005, 0.01, 0.015, 0.02, 0.045, 0.06, 0.075, 0.5, 0.8,
    ] {
        let eq = equilibria::interior_equilibrium(&presets::refuge_family(m), None).unwrap();
        assert_eq!(eq.roots.len(), 1, "m={m}: {:?}", eq.roots);
    }
}

#[test]
fn prey_level_rises_with_refuge() {
    let ms = [0.010, 0.015, 0.045, 0.060, 0.075, 0.500, 0.800];
    let xs: Vec<f64> = ms
        .iter()
        .map(|&m| {
            equilibria::interior_equilibrium(&presets::refuge_family(m), None)
                .unwrap()
                .point
                .x
        })
        .collect();
    assert!(xs.windows(2).all(|w| w[1] > w[0]), "{xs:?}");
}
