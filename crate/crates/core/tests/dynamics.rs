//! Time-domain checks of the stability analysis.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bioeco_core::bifurcation::hopf_scan;
use bioeco_core::equilibria::{classify, gas_condition, interior_equilibrium};
use bioeco_core::simulate::{detect_limit_cycle, integrate, verify_bound, CycleVerdict, SimConfig};
use bioeco_core::{presets, State};

fn verdict(m: f64, start: State, t_end: f64) -> CycleVerdict {
    let params = presets::refuge_family(m);
    let config = SimConfig::new(t_end);
    let traj = integrate(&params, start, &config).unwrap();
    detect_limit_cycle(&traj, &config).unwrap().verdict
}

#[test]
fn supercritical_verdict_is_dynamically_consistent() {
    let m_h = hopf_scan(&presets::refuge_family(0.0), 0.001, 0.02, 40)
        .unwrap()
        .roots[0]
        .m_h;
    assert_eq!(
        verdict(0.9 * m_h, State::new(60.0, 15.0), 2000.0),
        CycleVerdict::Oscillating
    );
    assert_eq!(
        verdict(1.1 * m_h, State::new(60.0, 15.0), 2000.0),
        CycleVerdict::Converged
    );
}

#[test]
fn cycle_verdicts_follow_classification() {
    for m in [0.005, 0.01, 0.015] {
        let params = presets::refuge_family(m);
        let eq = interior_equilibrium(&params, None).unwrap();
        let class = classify(&params, &eq).unwrap().classification;
        let v = verdict(m, State::new(60.0, 15.0), 2000.0);
        if class.is_stable() {
            assert_eq!(v, CycleVerdict::Converged, "m={m}");
        } else {
            assert_eq!(v, CycleVerdict::Oscillating, "m={m}");
        }
    }
}

#[test]
fn oscillation_respects_ultimate_bound() {
    let params = presets::refuge_family(0.005);
    let traj = integrate(&params, State::new(60.0, 15.0), &SimConfig::new(2000.0)).unwrap();
    assert!(verify_bound(&traj));
}

#[test]
fn integrator_self_convergence() {
    let params = presets::refuge_family(0.005);
    let run = |tol: f64| {
        let cfg = SimConfig {
            rel_tol: tol,
            abs_tol: tol,
            ..SimConfig::new(100.0)
        };
        integrate(&params, State::new(60.0, 15.0), &cfg)
            .unwrap()
            .last()
            .unwrap()
    };
    let loose = 1e-7;
    let (a, b) = (run(loose), run(loose / 10.0));
    let scale = 1.0 + a.norm_inf();
    assert!((a.x - b.x).abs() <= 5.0 * loose * scale, "{a:?} vs {b:?}");
    assert!((a.y - b.y).abs() <= 5.0 * loose * scale, "{a:?} vs {b:?}");
}

#[test]
fn positivity_from_random_starts() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let m = rng.gen_range(0.0..0.05);
        let params = presets::refuge_family(m);
        let y_hi = if m > 0.0 { (0.9 / m).min(60.0) } else { 60.0 };
        let start = State::new(rng.gen_range(0.0..600.0), rng.gen_range(0.0..y_hi));
        let traj = integrate(&params, start, &SimConfig::new(200.0)).unwrap();
        assert!(traj.states.iter().all(State::is_nonnegative));
        assert!(traj.validity.iter().all(|v| v.holds()));
    }
}

// The start keeps 1 - m y > 0 for every refuge value in the list.
#[test]
fn predator_declines_with_refuge_beyond_threshold() {
    let ms = [0.015, 0.045, 0.060, 0.075, 0.500, 0.800];
    let terminal: Vec<f64> = ms
        .iter()
        .map(|&m| {
            let params = presets::refuge_family(m);
            let traj = integrate(&params, State::new(60.0, 1.0), &SimConfig::new(2000.0)).unwrap();
            assert!(traj.validity.iter().all(|v| v.holds()), "m={m}");
            traj.last().unwrap().y
        })
        .collect();
    assert!(terminal.windows(2).all(|w| w[1] < w[0]), "{terminal:?}");
}

#[test]
fn global_condition_implies_convergence_from_random_starts() {
    let params = presets::refuge_family(0.015);
    let eq = interior_equilibrium(&params, None).unwrap();
    assert!(gas_condition(&params, &eq, None).unwrap().holds);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let start = State::new(rng.gen_range(1.0..500.0), rng.gen_range(1.0..60.0));
        let config = SimConfig::new(3000.0);
        let traj = integrate(&params, start, &config).unwrap();
        let end = traj.last().unwrap();
        assert!(
            (end.x - eq.point.x).abs() < 1e-3 * eq.point.x
                && (end.y - eq.point.y).abs() < 1e-3 * eq.point.y,
            "from {start:?} ended at {end:?}"
        );
    }
}
