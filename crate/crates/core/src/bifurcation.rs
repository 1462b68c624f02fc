//! Transcritical test at the prey-only branch and Hopf detection in the
//! refuge coefficient, with the first Lyapunov number.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::equilibria;
use crate::model::{self, ModelParams, State, TaylorCoefficients};
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TranscriticalReport {
    /// Critical growth rate `q1 E1`.
    pub r_tc: f64,
    /// Right null vector of the axial Jacobian.
    pub v: [f64; 2],
    /// Left null vector of the axial Jacobian.
    pub w: [f64; 2],
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub confirmed: bool,
}

/// Sotomayor quantities for the exchange of stability between the axial
/// branch and the origin as `r` crosses `q1 E1`.
pub fn transcritical_check(params: &ModelParams) -> Result<TranscriticalReport> {
    params.validate()?;
    let r_tc = params.prey_harvest();
    if r_tc <= 0.0 {
        return Err(Error::InvalidParameter {
            name: "E1",
            reason: "critical growth rate q1*E1 must be positive".into(),
        });
    }
    let at = ModelParams { r: r_tc, ..*params };
    let x1 = at.k * (1.0 - at.prey_harvest() / r_tc);
    let axial = State::new(x1, 0.0);
    let j = model::jacobian(&at, axial)?;
    if j[1][1].abs() <= 1e-14 * at.predator_loss() {
        return Err(Error::DoubleZeroEigenvalue);
    }
    let v = [1.0, 0.0];
    let w = [1.0, -j[0][1] / j[1][1]];
    // F_r = (x (1 - x/k), 0) and D F_r v = (1 - 2x/k, 0)
    let f_r = [x1 * (1.0 - x1 / at.k), 0.0];
    let s1 = w[0] * f_r[0] + w[1] * f_r[1];
    let s2 = w[0] * (1.0 - 2.0 * x1 / at.k);
    let c = model::taylor_coefficients(&at, axial)?;
    let s3 = 2.0 * (w[0] * c.a20 + w[1] * c.b20);
    Ok(TranscriticalReport {
        r_tc,
        v,
        w,
        s1,
        s2,
        s3,
        confirmed: s1.abs() <= 1e-10 && s2.abs() > 1e-10 && s3.abs() > 1e-10,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HopfVerdict {
    Supercritical,
    Subcritical,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfResult {
    pub m_h: f64,
    pub trace_at_mh: f64,
    pub det_at_mh: f64,
    /// `d trace / dm` along the equilibrium branch.
    pub transversality: f64,
    /// `p y (2aex^2 - amxy^2 + axy + 2ex - y) / D^3` at the Hopf state:
    /// minus the partial derivative of the trace in `m` with `(x, y)` frozen.
    pub frozen_state_trace_slope: f64,
    pub sigma: f64,
    pub verdict: HopfVerdict,
    pub equilibrium_at_mh: State,
    pub coefficients: TaylorCoefficients,
}

/// First Lyapunov number with its magnitude scale (the same expression
/// with every product replaced by its absolute value).
pub fn first_lyapunov_number(c: &TaylorCoefficients) -> (f64, f64) {
    let (a, b, cc) = (c.a10, c.a01, c.b10);
    let delta = c.delta;
    let quadratic = [
        a * cc * (c.a11 * c.a11 + c.a11 * c.b02 + c.a02 * c.b11),
        a * b * (c.b11 * c.b11 + c.a20 * c.b11 + c.a11 * c.b02),
        cc * cc * (c.a11 * c.a02 + 2.0 * c.a02 * c.b02),
        -2.0 * a * cc * (c.b02 * c.b02 - c.a20 * c.a02),
        -2.0 * a * b * (c.a20 * c.a20 - c.b20 * c.b02),
        -b * b * (2.0 * c.a20 * c.b20 + c.b11 * c.b20),
        (b * cc - 2.0 * a * a) * (c.b11 * c.b02 - c.a11 * c.a20),
    ];
    let cubic_factor = a * a + b * cc;
    let cubic = [
        3.0 * (cc * c.b03 - b * c.a30),
        2.0 * a * (c.a21 + c.b12),
        cc * c.a12 - b * c.b21,
    ];
    let bracket = quadratic.iter().sum::<f64>() - cubic_factor * cubic.iter().sum::<f64>();
    let magnitude = quadratic.iter().map(|t| t.abs()).sum::<f64>()
        + cubic_factor.abs() * cubic.iter().map(|t| t.abs()).sum::<f64>();
    let prefactor = -3.0 * PI / (2.0 * b * delta.powf(1.5));
    (prefactor * bracket, prefactor.abs() * magnitude)
}

fn verdict_of(sigma: f64, scale: f64) -> HopfVerdict {
    let tol = 1e-12 * scale;
    if sigma < -tol {
        HopfVerdict::Supercritical
    } else if sigma > tol {
        HopfVerdict::Subcritical
    } else {
        HopfVerdict::Degenerate
    }
}

fn trace_scale(j: &model::Mat2) -> f64 {
    j[0][0].abs() + j[1][1].abs()
}

/// Step for the central difference in [`transversality`].
pub const TRANSVERSALITY_STEP: f64 = 1e-6;

/// `d trace(J*(m)) / dm` at `m_h`, re-solving the equilibrium on each side.
pub fn transversality(params: &ModelParams, m_h: f64) -> Result<f64> {
    let seed = equilibria::interior_equilibrium(&params.with_m(m_h), None)?.point;
    transversality_seeded(params, m_h, seed, TRANSVERSALITY_STEP)
}

/// One-sided variant used as a consistency check.
pub fn transversality_forward(params: &ModelParams, m_h: f64, step: f64) -> Result<f64> {
    let seed = equilibria::interior_equilibrium(&params.with_m(m_h), None)?.point;
    let t0 = trace_at(params, m_h, Some(seed))?.0;
    let t1 = trace_at(params, m_h + step, Some(seed))?.0;
    Ok((t1 - t0) / step)
}

fn transversality_seeded(params: &ModelParams, m_h: f64, seed: State, h: f64) -> Result<f64> {
    let plus = trace_at(params, m_h + h, Some(seed))?.0;
    let minus = trace_at(params, m_h - h, Some(seed))?.0;
    Ok((plus - minus) / (2.0 * h))
}

/// Trace, determinant, trace scale and equilibrium at refuge value `m`.
fn trace_at(params: &ModelParams, m: f64, seed: Option<State>) -> Result<(f64, f64, f64, State)> {
    let p = params.with_m(m);
    let eq = equilibria::interior_equilibrium_with(&p, seed, Exec::Sequential)?;
    let j = model::jacobian(&p, eq.point)?;
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    Ok((tr, det, trace_scale(&j), eq.point))
}

/// Completes a Hopf candidate: checks the trace, then computes the
/// coefficients, the Lyapunov number and the transversality derivative.
pub fn lyapunov_number(params: &ModelParams, m_h: f64) -> Result<HopfResult> {
    hopf_result_at(params, m_h, None)
}

fn hopf_result_at(params: &ModelParams, m_h: f64, seed: Option<State>) -> Result<HopfResult> {
    let (trace, det, scale, point) = trace_at(params, m_h, seed)?;
    let tolerance = 1e-8 * scale;
    if trace.abs() > tolerance {
        return Err(Error::NotAtHopfPoint {
            trace: trace.abs(),
            tolerance,
        });
    }
    let p = params.with_m(m_h);
    let coefficients = model::taylor_coefficients(&p, point)?;
    if !(coefficients.delta > 0.0) {
        return Err(Error::NegativeDelta(coefficients.delta));
    }
    let (sigma, sigma_scale) = first_lyapunov_number(&coefficients);
    Ok(HopfResult {
        m_h,
        trace_at_mh: trace,
        det_at_mh: det,
        transversality: transversality_seeded(params, m_h, point, TRANSVERSALITY_STEP)?,
        frozen_state_trace_slope: frozen_state_trace_slope(&p, point),
        sigma,
        verdict: verdict_of(sigma, sigma_scale),
        equilibrium_at_mh: point,
        coefficients,
    })
}

/// Closed-form `m`-derivative expression with the state held fixed.
pub fn frozen_state_trace_slope(params: &ModelParams, s: State) -> f64 {
    let ModelParams { p, a, m, e, .. } = *params;
    let State { x, y } = s;
    let den = params.denominator(s);
    p * y * (2.0 * a * e * x * x - a * m * x * y * y + a * x * y + 2.0 * e * x - y)
        / (den * den * den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfScan {
    pub roots: Vec<HopfResult>,
    /// Trace zeros rejected because the determinant was not positive.
    pub discarded: Vec<f64>,
}

/// Grid points per continuation chunk. Chunking is fixed so that results
/// do not depend on the execution strategy.
const CHUNK: usize = 16;
const MAX_BISECTIONS: usize = 200;

pub fn hopf_scan(
    params: &ModelParams,
    m_lo: f64,
    m_hi: f64,
    grid_points: usize,
) -> Result<HopfScan> {
    hopf_scan_with(params, m_lo, m_hi, grid_points, Exec::default())
}

pub fn hopf_scan_with(
    params: &ModelParams,
    m_lo: f64,
    m_hi: f64,
    grid_points: usize,
    exec: Exec,
) -> Result<HopfScan> {
    params.validate()?;
    if !(0.0 <= m_lo && m_lo < m_hi && m_hi <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: format!("scan range [{m_lo}, {m_hi}] must satisfy 0 <= m_lo < m_hi <= 1"),
        });
    }
    if grid_points < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_points",
            reason: format!("at least 2 required, got {grid_points}"),
        });
    }
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| {
            if i == grid_points - 1 {
                m_hi
            } else {
                m_lo + (m_hi - m_lo) * i as f64 / (grid_points - 1) as f64
            }
        })
        .collect();

    let chunks: Vec<&[f64]> = grid.chunks(CHUNK).collect();
    let samples: Vec<Option<(f64, State)>> = exec
        .map(&chunks, |chunk| {
            let mut seed = None;
            chunk
                .iter()
                .map(|&m| match trace_at(params, m, seed) {
                    Ok((tr, _, _, point)) => {
                        seed = Some(point);
                        Some((tr, point))
                    }
                    Err(_) => {
                        seed = None;
                        None
                    }
                })
                .collect::<Vec<_>>()
        })
        .into_iter()
        .flatten()
        .collect();

    if samples.iter().all(Option::is_none) {
        return Err(Error::NoInteriorBranch { m_lo, m_hi });
    }

    let mut brackets = Vec::new();
    for i in 0..grid.len() {
        let Some((tr, point)) = samples[i] else {
            continue;
        };
        if tr == 0.0 {
            brackets.push(Bracket::exact(grid[i], point));
            continue;
        }
        if let Some(Some((tr_next, next))) = samples.get(i + 1) {
            if tr * tr_next < 0.0 {
                brackets.push(Bracket {
                    lo: grid[i],
                    hi: grid[i + 1],
                    tr_lo: tr,
                    seed_lo: point,
                    seed_hi: *next,
                });
            }
        }
    }

    let refined: Vec<Result<(f64, State)>> = exec.map(&brackets, |b| refine(params, b.clone()));
    let mut roots = Vec::new();
    let mut discarded = Vec::new();
    for outcome in refined {
        let (m_h, seed) = outcome?;
        let (_, det, _, _) = trace_at(params, m_h, Some(seed))?;
        if det <= 0.0 {
            log::warn!("trace zero at m = {m_h} discarded: determinant {det:e} is not positive");
            discarded.push(m_h);
            continue;
        }
        roots.push(hopf_result_at(params, m_h, Some(seed))?);
    }
    Ok(HopfScan { roots, discarded })
}

#[derive(Debug, Clone)]
struct Bracket {
    lo: f64,
    hi: f64,
    tr_lo: f64,
    seed_lo: State,
    seed_hi: State,
}

impl Bracket {
    fn exact(m: f64, point: State) -> Self {
        Self {
            lo: m,
            hi: m,
            tr_lo: 0.0,
            seed_lo: point,
            seed_hi: point,
        }
    }
}

/// Bisection until the bracket is below `1e-9` wide and the trace is
/// within `1e-10` of its scale, or the bracket cannot shrink further.
fn refine(params: &ModelParams, mut b: Bracket) -> Result<(f64, State)> {
    if b.lo == b.hi {
        return Ok((b.lo, b.seed_lo));
    }
    let mut best = (b.lo, b.seed_lo, f64::INFINITY);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (b.lo + b.hi);
        if mid <= b.lo || mid >= b.hi {
            break;
        }
        let (tr, _, scale, point) = trace_at(params, mid, Some(b.seed_lo))?;
        if tr.abs() < best.2 {
            best = (mid, point, tr.abs());
        }
        if b.hi - b.lo <= 1e-9 && tr.abs() <= 1e-10 * scale {
            break;
        }
        if tr == 0.0 {
            break;
        }
        if (tr < 0.0) == (b.tr_lo < 0.0) {
            b.lo = mid;
            b.tr_lo = tr;
            b.seed_lo = point;
        } else {
            b.hi = mid;
            b.seed_hi = point;
        }
    }
    Ok((best.0, best.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn transcritical_examples() {
        let params = presets::extinction_set();
        let rep = transcritical_check(&params).unwrap();
        assert!((rep.r_tc - 1.2).abs() < 1e-15);
        assert!((rep.s3 + 0.012).abs() < 1e-15);
        assert_eq!(rep.s1, 0.0);
        assert_eq!(rep.s2, 1.0);
        assert_eq!(rep.v, [1.0, 0.0]);
        assert!(rep.confirmed);
        for m in [0.0, 0.3, 1.0] {
            let rep = transcritical_check(&presets::refuge_family(m)).unwrap();
            assert!((rep.s3 + 2.0 * rep.r_tc / 500.0).abs() < 1e-15);
        }
    }

    #[test]
    fn transcritical_needs_prey_harvest() {
        let params = presets::refuge_family(0.1).with_efforts(0.0, 1.0);
        assert!(transcritical_check(&params).is_err());
    }

    #[test]
    fn hopf_point_of_reference_family() {
        let scan = hopf_scan(&presets::refuge_family(0.0), 0.001, 0.02, 40).unwrap();
        assert_eq!(scan.roots.len(), 1);
        let h = &scan.roots[0];
        assert!((h.m_h - 0.010695).abs() < 1e-4, "{}", h.m_h);
        assert!(h.det_at_mh > 0.0);
        let scale = h.coefficients.a10.abs() + h.coefficients.b01.abs();
        assert!(h.trace_at_mh.abs() <= 1e-10 * scale);
        assert!(h.transversality < 0.0);
        assert!(h.sigma < 0.0);
        assert_eq!(h.verdict, HopfVerdict::Supercritical);
        // frozen-state partial and the branch derivative differ only by
        // the equilibrium's own drift in m
        assert!(h.frozen_state_trace_slope.is_finite());
    }

    #[test]
    fn no_hopf_on_stable_stretch() {
        let scan = hopf_scan(&presets::refuge_family(0.0), 0.012, 0.02, 20).unwrap();
        assert!(scan.roots.is_empty());
    }

    #[test]
    fn scan_without_branch_fails() {
        let params = presets::refuge_family(0.0).with_efforts(2.0, 10.0);
        assert!(matches!(
            hopf_scan(&params, 0.001, 0.02, 10),
            Err(Error::NoInteriorBranch { .. })
        ));
    }

    #[test]
    fn scan_rejects_bad_range() {
        let params = presets::refuge_family(0.0);
        assert!(hopf_scan(&params, 0.02, 0.01, 10).is_err());
        assert!(hopf_scan(&params, 0.0, 0.01, 1).is_err());
    }

    #[test]
    fn sequential_and_parallel_scans_agree() {
        let params = presets::refuge_family(0.0);
        let a = hopf_scan_with(&params, 0.001, 0.02, 40, Exec::Sequential).unwrap();
        let b = hopf_scan_with(&params, 0.001, 0.02, 40, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn transversality_difference_schemes_agree() {
        let params = presets::refuge_family(0.0);
        let m_h = hopf_scan(&params, 0.001, 0.02, 20).unwrap().roots[0].m_h;
        let central = transversality(&params, m_h).unwrap();
        let forward = transversality_forward(&params, m_h, 1e-6).unwrap();
        assert!(
            (central - forward).abs() <= 1e-4 * central.abs(),
            "{central} {forward}"
        );
        assert!(central < 0.0);
    }

    #[test]
    fn lyapunov_number_preconditions() {
        let params = presets::refuge_family(0.0);
        assert!(matches!(
            lyapunov_number(&params, 0.005),
            Err(Error::NotAtHopfPoint { .. })
        ));
        let mut c =
            model::taylor_coefficients(&params.with_m(0.01), State::new(80.0, 20.0)).unwrap();
        c.delta = -1.0;
        // the formula itself is undefined for negative delta
        assert!(first_lyapunov_number(&c).0.is_nan());
    }

    #[test]
    fn lyapunov_number_of_normal_form() {
        // x' = -y + x(x^2 + y^2), y' = x + y(x^2 + y^2): repelling focus
        let c = TaylorCoefficients::from_entries(&[
            ("a01", -1.0),
            ("b10", 1.0),
            ("a30", 1.0),
            ("a12", 1.0),
            ("b21", 1.0),
            ("b03", 1.0),
        ]);
        let (sigma, _) = first_lyapunov_number(&c);
        assert!((sigma - 12.0 * PI).abs() < 1e-12);
        assert!(sigma > 0.0);
    }
}
