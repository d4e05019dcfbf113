//! Periodic orbits of the stroboscopic map, their existence thresholds
//! and their Floquet multipliers.

use std::f64::consts::TAU;

use num_complex::Complex64;

use super::thresholds::{
    check_ratio, cubic_melnikov_seeds, cubic_order, theta0_from_c, ThresholdEstimate, ThresholdMethod,
};
use crate::classify::winding_count;
use crate::error::{invalid, Error, Result};
use crate::integrate::{rk::Dop853, IntegratorConfig};
use crate::models::{Model, PhaseState};

/// Largest return-map residual accepted as a periodic orbit.
pub const ORBIT_RESIDUAL: f64 = 1e-10;
const MAX_NEWTON: usize = 40;
const MAX_NEWTON_STEP: f64 = 0.25;
/// Intermediate damping values used when continuing an orbit.
const CONTINUATION_STEPS: usize = 4;

fn flow_tol(icfg: &IntegratorConfig) -> f64 {
    icfg.tol.min(1e-12)
}

/// State after `duration` and the 2×2 linearised flow along the way.
pub fn flow_with_tangent(
    model: &Model,
    state: &PhaseState,
    duration: f64,
    icfg: &IntegratorConfig,
) -> Result<(PhaseState, [[f64; 2]; 2])> {
    icfg.validate()?;
    let mut stepper = Dop853::new(flow_tol(icfg), icfg.min_step * 1e-3, icfg.max_step);
    let mut f = |t: f64, y: &[f64; 6]| {
        let s = PhaseState { q: y[0], v: y[1], t };
        let (dq, dv) = model.rhs(&s);
        let j = model.jacobian(&s);
        [
            dq,
            dv,
            j[0][0] * y[2] + j[0][1] * y[3],
            j[1][0] * y[2] + j[1][1] * y[3],
            j[0][0] * y[4] + j[0][1] * y[5],
            j[1][0] * y[4] + j[1][1] * y[5],
        ]
    };
    let t_end = state.t + duration;
    let mut y = [state.q, state.v, 1.0, 0.0, 0.0, 1.0];
    let mut t = state.t;
    if let Some(k) = model.schedule().knee().filter(|&k| k > t && k < t_end) {
        y = stepper.solve(&mut f, t, y, k)?;
        t = k;
    }
    let y = stepper.solve(&mut f, t, y, t_end)?;
    Ok((
        PhaseState {
            q: y[0],
            v: y[1],
            t: t_end,
        },
        [[y[2], y[4]], [y[3], y[5]]],
    ))
}

fn not_found(p: i64, q: u32, reason: impl Into<String>) -> Error {
    Error::NotFound {
        p,
        q,
        reason: reason.into(),
    }
}

/// Newton iteration on the `2πq` stroboscopic return map, from `guess`.
/// The orbit is accepted when the return residual is below
/// [`ORBIT_RESIDUAL`] and it winds `p` times per period.
pub fn find_periodic_orbit(
    model: &Model,
    p: i64,
    q: u32,
    guess: &PhaseState,
    icfg: &IntegratorConfig,
) -> Result<PhaseState> {
    check_ratio(p, q)?;
    if model.schedule().delta() != 0.0 {
        return Err(invalid("schedule", "periodic orbits need a constant damping"));
    }
    let period = TAU * q as f64;
    // θ advances by 2πp over one period; q returns to itself
    let shift = match model {
        Model::SpinOrbit(_) => TAU * p as f64,
        Model::Cubic(_) => 0.0,
    };
    let mut y = *guess;
    for _ in 0..MAX_NEWTON {
        let (end, m) = flow_with_tangent(model, &y, period, icfg)
            .map_err(|e| not_found(p, q, format!("flow failed: {e}")))?;
        let f = [end.q - y.q - shift, end.v - y.v];
        if f[0].abs().max(f[1].abs()) <= ORBIT_RESIDUAL {
            return verify_winding(model, p, q, y, icfg);
        }
        let j = [[m[0][0] - 1.0, m[0][1]], [m[1][0], m[1][1] - 1.0]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det.abs() > 1e-14) {
            return Err(not_found(p, q, "singular return map"));
        }
        let mut dq = -(j[1][1] * f[0] - j[0][1] * f[1]) / det;
        let mut dv = -(-j[1][0] * f[0] + j[0][0] * f[1]) / det;
        let norm = dq.hypot(dv);
        if norm > MAX_NEWTON_STEP {
            dq *= MAX_NEWTON_STEP / norm;
            dv *= MAX_NEWTON_STEP / norm;
        }
        y = PhaseState {
            q: y.q + dq,
            v: y.v + dv,
            t: y.t,
        };
        if !y.is_finite() || y.q.abs().max(y.v.abs()) > 1e3 {
            return Err(not_found(p, q, "Newton iteration diverged"));
        }
    }
    Err(not_found(p, q, format!("no convergence in {MAX_NEWTON} Newton steps")))
}

fn verify_winding(model: &Model, p: i64, q: u32, y: PhaseState, icfg: &IntegratorConfig) -> Result<PhaseState> {
    if let Model::Cubic(_) = model {
        let rk = IntegratorConfig {
            method: crate::integrate::Method::AdaptiveRK,
            ..*icfg
        };
        let w = winding_count(model, &y, q, &rk)?;
        if w != Some(p) {
            return Err(not_found(p, q, format!("converged to an orbit with winding {w:?}")));
        }
    }
    Ok(y)
}

/// First-order guesses for the `p:q` orbit at the model's damping.
pub fn first_order_seeds(model: &Model, p: i64, q: u32) -> Result<Vec<PhaseState>> {
    check_ratio(p, q)?;
    let gamma = model.schedule().gamma0();
    let eps = model.epsilon();
    if eps <= 0.0 {
        return Err(invalid("epsilon", "no resonances without forcing"));
    }
    let omega = p as f64 / q as f64;
    match model {
        Model::Cubic(_) => {
            if p == 1 && q % 2 == 0 {
                Ok(cubic_melnikov_seeds(p, q, eps, gamma)?.to_vec())
            } else {
                // no first-order phase selection: try phases along the orbit
                let alpha = super::elliptic::cubic_amplitude(omega);
                let quarter = super::elliptic::complete_k(super::elliptic::CUBIC_MODULUS)?;
                Ok((0..8)
                    .map(|i| {
                        let u = quarter * i as f64 / 2.0;
                        let (cn, sn, dn) =
                            super::elliptic::jacobi_elliptic(u, super::elliptic::CUBIC_MODULUS)
                                .expect("finite argument");
                        PhaseState {
                            q: alpha * cn,
                            v: -alpha * alpha * sn * dn,
                            t: 0.0,
                        }
                    })
                    .collect())
            }
        }
        Model::SpinOrbit(sp) => {
            let pair = theta0_from_c(sp.eccentricity(), p, q, gamma / eps)?;
            Ok(pair
                .iter()
                .map(|&th| PhaseState {
                    q: th,
                    v: omega,
                    t: 0.0,
                })
                .collect())
        }
    }
}

fn at_gamma(model: &Model, gamma: f64) -> Result<Model> {
    Ok(model.with_schedule(model.schedule().with_gamma0(gamma)?))
}

/// Follows an orbit from `(g_from, orbit)` to `g_to` in small damping steps.
fn continue_orbit(
    model: &Model,
    p: i64,
    q: u32,
    g_from: f64,
    orbit: &PhaseState,
    g_to: f64,
    icfg: &IntegratorConfig,
) -> Result<PhaseState> {
    let mut y = *orbit;
    for i in 1..=CONTINUATION_STEPS {
        let g = g_from + (g_to - g_from) * i as f64 / CONTINUATION_STEPS as f64;
        y = find_periodic_orbit(&at_gamma(model, g)?, p, q, &y, icfg)?;
    }
    Ok(y)
}

/// Damping at which the `p:q` orbit disappears, by bisection on orbit
/// existence with continuation from the last orbit found. The orbit must
/// exist at `bracket.0` and not at `bracket.1`.
pub fn empirical_threshold(
    model: &Model,
    p: i64,
    q: u32,
    bracket: (f64, f64),
    guess: Option<&PhaseState>,
    icfg: &IntegratorConfig,
) -> Result<ThresholdEstimate> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::InvalidBracket {
            lo,
            hi,
            reason: "need 0 < lo < hi".into(),
        });
    }
    let eps = model.epsilon();
    if eps <= 0.0 {
        return Err(invalid("epsilon", "must be > 0"));
    }
    let base = at_gamma(model, lo)?;
    let seeds = match guess {
        Some(g) => vec![*g],
        None => first_order_seeds(&base, p, q).unwrap_or_default(),
    };
    let mut orbit = seeds
        .iter()
        .find_map(|s| find_periodic_orbit(&base, p, q, s, icfg).ok())
        .ok_or_else(|| Error::InvalidBracket {
            lo,
            hi,
            reason: format!("no {p}:{q} orbit at the lower end"),
        })?;
    if continue_orbit(model, p, q, lo, &orbit, hi, icfg).is_ok() {
        return Err(Error::InvalidBracket {
            lo,
            hi,
            reason: format!("the {p}:{q} orbit persists at the upper end"),
        });
    }
    while hi - lo > 1e-3 * lo {
        let mid = 0.5 * (lo + hi);
        match continue_orbit(model, p, q, lo, &orbit, mid, icfg) {
            Ok(o) => {
                lo = mid;
                orbit = o;
            }
            Err(_) => hi = mid,
        }
    }
    let n_order = match model {
        Model::Cubic(_) => cubic_order(p, q),
        Model::SpinOrbit(_) => 1,
    };
    Ok(ThresholdEstimate {
        p,
        q,
        c0: 0.5 * (lo + hi) / eps.powi(n_order as i32),
        n_order,
        method: ThresholdMethod::Bisection,
        bracket: Some((lo, hi)),
    })
}

/// Linearised return map over one orbit period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyResult {
    pub matrix: [[f64; 2]; 2],
    /// Floquet multipliers, larger modulus first.
    pub eigenvalues: [Complex64; 2],
    /// `T⁻¹ Re log λ` for each multiplier.
    pub lyapunov: [f64; 2],
    pub period: f64,
}

impl MonodromyResult {
    pub fn det(&self) -> f64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }

    pub fn is_attracting(&self) -> bool {
        self.eigenvalues.iter().all(|l| l.norm() < 1.0)
    }
}

/// Monodromy matrix of the variational equations along the orbit through
/// `orbit_ic`, over `T = 2πq`.
pub fn monodromy(model: &Model, orbit_ic: &PhaseState, q: u32, icfg: &IntegratorConfig) -> Result<MonodromyResult> {
    if q == 0 {
        return Err(invalid("q", "must be >= 1"));
    }
    let period = TAU * q as f64;
    let (_, m) = flow_with_tangent(model, orbit_ic, period, icfg)?;
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let root = Complex64::new(0.25 * tr * tr - det, 0.0).sqrt();
    let mut eig = [0.5 * tr + root, 0.5 * tr - root];
    if eig[1].norm() > eig[0].norm() {
        eig.swap(0, 1);
    }
    let lyapunov = eig.map(|l| l.norm().ln() / period);
    Ok(MonodromyResult {
        matrix: m,
        eigenvalues: eig,
        lyapunov,
        period,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::elliptic::cubic_amplitude;
    use crate::analysis::thresholds::analytic_threshold_spin_orbit;
    use crate::models::{CubicParams, DampingSchedule, SpinOrbitParams};

    fn cubic(eps: f64, gamma: f64) -> Model {
        let s = if gamma == 0.0 {
            DampingSchedule::Constant { gamma0: 0.0 }
        } else {
            DampingSchedule::constant(gamma).unwrap()
        };
        Model::Cubic(CubicParams { epsilon: eps, schedule: s })
    }

    #[test]
    fn unperturbed_orbit_closes_with_the_elliptic_amplitude() {
        let icfg = IntegratorConfig::adaptive_rk();
        for (p, q) in [(1i64, 2u32), (1, 4), (1, 1)] {
            let alpha = cubic_amplitude(p as f64 / q as f64);
            let ic = PhaseState { q: alpha, v: 0.0, t: 0.0 };
            let (end, _) = flow_with_tangent(&cubic(0.0, 0.0), &ic, TAU * q as f64, &icfg).unwrap();
            assert!((end.q - alpha).abs() < 1e-9 && end.v.abs() < 1e-9, "{p}/{q}: {end:?}");
            assert_eq!(winding_count(&cubic(0.0, 0.0), &ic, q, &icfg).unwrap(), Some(p));
        }
    }

    #[test]
    fn tangent_flow_matches_finite_differences() {
        let m = cubic(0.1, 0.01);
        let icfg = IntegratorConfig::default();
        let s = PhaseState { q: 0.5, v: 0.2, t: 0.3 };
        let (_, j) = flow_with_tangent(&m, &s, 7.0, &icfg).unwrap();
        let h = 1e-6;
        let end = |dq: f64, dv: f64| {
            flow_with_tangent(&m, &PhaseState { q: s.q + dq, v: s.v + dv, ..s }, 7.0, &icfg).unwrap().0
        };
        let (a, b) = (end(h, 0.0), end(-h, 0.0));
        assert!(((a.q - b.q) / (2.0 * h) - j[0][0]).abs() < 1e-6);
        assert!(((a.v - b.v) / (2.0 * h) - j[1][0]).abs() < 1e-6);
        let (a, b) = (end(0.0, h), end(0.0, -h));
        assert!(((a.q - b.q) / (2.0 * h) - j[0][1]).abs() < 1e-6);
        assert!(((a.v - b.v) / (2.0 * h) - j[1][1]).abs() < 1e-6);
    }

    #[test]
    fn stable_one_half_orbit_attracts() {
        let m = cubic(0.1, 0.009);
        let icfg = IntegratorConfig::default();
        let mut attracting = 0;
        for seed in first_order_seeds(&m, 1, 2).unwrap() {
            let orbit = find_periodic_orbit(&m, 1, 2, &seed, &icfg).unwrap();
            let mono = monodromy(&m, &orbit, 2, &icfg).unwrap();
            let det = (-0.009 * 4.0 * std::f64::consts::PI).exp();
            assert!((mono.det() / det - 1.0).abs() < 1e-6);
            if mono.is_attracting() {
                attracting += 1;
            }
        }
        assert!(attracting >= 1);
    }

    #[test]
    fn above_threshold_is_not_found() {
        let m = cubic(0.1, 0.03);
        let alpha = cubic_amplitude(0.5);
        let r = find_periodic_orbit(&m, 1, 2, &PhaseState { q: alpha, v: 0.0, t: 0.0 }, &IntegratorConfig::default());
        assert!(matches!(r, Err(Error::NotFound { .. })), "{r:?}");
    }

    #[test]
    fn spin_orbit_three_halves_from_first_order_seed() {
        let e = 0.2056;
        let m = Model::SpinOrbit(
            SpinOrbitParams::new(e, 1e-3, DampingSchedule::constant(3e-4).unwrap()).unwrap(),
        );
        let icfg = IntegratorConfig::default();
        let seeds = first_order_seeds(&m, 3, 2).unwrap();
        let orbit = find_periodic_orbit(&m, 3, 2, &seeds[0], &icfg).unwrap();
        assert!((orbit.v - 1.5).abs() < 0.05);
        let mono = monodromy(&m, &orbit, 2, &icfg).unwrap();
        assert!(mono.is_attracting());
        assert!(analytic_threshold_spin_orbit(e, 3, 2).unwrap().c0 * 1e-3 > 3e-4);
    }

    #[test]
    fn ramped_window_determinant() {
        let m = Model::Cubic(
            CubicParams::new(0.1, DampingSchedule::linear_ramp(0.01, 0.02).unwrap()).unwrap(),
        );
        let s = PhaseState { q: 0.4, v: -0.3, t: 0.0 };
        let mono = monodromy(&m, &s, 1, &IntegratorConfig::default()).unwrap();
        let expected = (-m.schedule().integral(0.0, TAU)).exp();
        assert!((mono.det() / expected - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bracket_validation() {
        let m = cubic(0.1, 0.01);
        let icfg = IntegratorConfig::default();
        assert!(matches!(
            empirical_threshold(&m, 1, 2, (0.02, 0.01), None, &icfg),
            Err(Error::InvalidBracket { .. })
        ));
        assert!(matches!(
            empirical_threshold(&m, 1, 2, (0.001, 0.005), None, &icfg),
            Err(Error::InvalidBracket { .. })
        ));
    }
}
