//! Power-series integrator for the driven cubic oscillator.
//!
//! About `t0` the solution is written as `q(t0 + τ) = Σ q_k τ^k`. Substituting
//! into `q'' = −(1 + ε cos t) q³ − γ(t) q'` and matching powers of τ gives
//!
//! ```text
//! (k+2)(k+1) q_{k+2} = −U_k − ε (C ∗ U)_k − (Γ ∗ Q')_k
//! ```
//!
//! where `U = Q ∗ Q ∗ Q`, `C` is the series of `cos(t0 + τ)`, `Γ` that of
//! γ(t0 + τ) and `∗` the Cauchy product.

use crate::error::{invalid, Error, Result};
use crate::models::{CubicParams, DampingSchedule, Model, PhaseState};

use super::IntegratorConfig;

/// Ratio between consecutive trial steps.
pub const STEP_LADDER: f64 = 1.3;

/// Taylor coefficients of `q` and `v = q'` about `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCoefficients {
    pub t0: f64,
    pub q: Vec<f64>,
    pub v: Vec<f64>,
}

impl SeriesCoefficients {
    /// `(q, v)` at `t0 + h`.
    pub fn eval(&self, h: f64) -> (f64, f64) {
        (horner(&self.q, h), horner(&self.v, h))
    }
}

#[inline]
fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

/// Scratch space for repeated expansions at a fixed order.
#[derive(Debug, Clone)]
pub(crate) struct Workspace {
    order: usize,
    q: Vec<f64>,
    sq: Vec<f64>,
    cube: Vec<f64>,
    cos: Vec<f64>,
    gamma: Vec<f64>,
    gamma_len: usize,
}

impl Workspace {
    pub(crate) fn new(order: usize) -> Self {
        let n = order + 2;
        Self {
            order,
            q: vec![0.0; n],
            sq: vec![0.0; n],
            cube: vec![0.0; n],
            cos: vec![0.0; n],
            gamma: vec![0.0; n],
            gamma_len: 0,
        }
    }

    /// Fills `q[0..=order+1]` for the expansion about `state`.
    pub(crate) fn expand(&mut self, params: &CubicParams, state: &PhaseState) {
        let order = self.order;
        let (s, c) = state.t.sin_cos();
        // cos(t0 + τ) = Σ cos(t0 + kπ/2) τ^k / k!
        let cycle = [c, -s, -c, s];
        let mut fact = 1.0;
        for k in 0..order {
            if k > 0 {
                fact *= k as f64;
            }
            self.cos[k] = cycle[k % 4] / fact;
        }
        self.gamma_len = match params.schedule {
            DampingSchedule::Constant { gamma0 } => {
                self.gamma[0] = gamma0;
                1
            }
            DampingSchedule::LinearRamp { .. } => {
                params.schedule.series(state.t, &mut self.gamma[..2]);
                if self.gamma[1] == 0.0 {
                    1
                } else {
                    2
                }
            }
            DampingSchedule::ExpRamp { .. } => {
                params.schedule.series(state.t, &mut self.gamma[..order]);
                order
            }
        };

        let eps = params.epsilon;
        let q = &mut self.q;
        q[0] = state.q;
        q[1] = state.v;
        for k in 0..order {
            let mut sk = 0.0;
            for j in 0..=k {
                sk += q[j] * q[k - j];
            }
            self.sq[k] = sk;
            let mut uk = 0.0;
            for j in 0..=k {
                uk += q[j] * self.sq[k - j];
            }
            self.cube[k] = uk;
            let mut cu = 0.0;
            for j in 0..=k {
                cu += self.cos[j] * self.cube[k - j];
            }
            let mut gq = 0.0;
            for j in 0..self.gamma_len.min(k + 1) {
                gq += self.gamma[j] * (k - j + 1) as f64 * q[k - j + 1];
            }
            q[k + 2] = -(uk + eps * cu + gq) / ((k + 2) * (k + 1)) as f64;
        }
    }

    /// `(q, v, |ODE residual|)` of the current expansion at `t0 + h`.
    #[inline]
    pub(crate) fn probe(&self, params: &CubicParams, t0: f64, h: f64) -> (f64, f64, f64) {
        let q = &self.q;
        let n = self.order + 1;
        let mut x = 0.0;
        let mut dx = 0.0;
        let mut ddx = 0.0;
        for k in (0..=n).rev() {
            x = x * h + q[k];
            if k >= 1 {
                dx = dx * h + k as f64 * q[k];
            }
            if k >= 2 {
                ddx = ddx * h + (k * (k - 1)) as f64 * q[k];
            }
        }
        let t = t0 + h;
        let gamma = params.schedule.value(t);
        let res = ddx + (1.0 + params.epsilon * t.cos()) * x * x * x + gamma * dx;
        (x, dx, res.abs())
    }

    fn coefficients(&self, t0: f64) -> SeriesCoefficients {
        let n = self.order + 1;
        let q = self.q[..=n].to_vec();
        let v = (0..n).map(|k| (k + 1) as f64 * q[k + 1]).collect();
        SeriesCoefficients { t0, q, v }
    }
}

fn cubic_params(model: &Model) -> Result<&CubicParams> {
    match model {
        Model::Cubic(p) => Ok(p),
        Model::SpinOrbit(_) => Err(Error::Unsupported("the Taylor-series method")),
    }
}

/// Taylor coefficients of the cubic-oscillator solution through `state`.
/// `q` has `order + 2` entries and `v` has `order + 1`.
pub fn taylor_recurrence(model: &Model, state: &PhaseState, order: usize) -> Result<SeriesCoefficients> {
    let params = cubic_params(model)?;
    if order < 4 {
        return Err(invalid("series_order", format!("must be >= 4, got {order}")));
    }
    let mut ws = Workspace::new(order);
    ws.expand(params, state);
    Ok(ws.coefficients(state.t))
}

/// Outcome of one residual-controlled series step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct StepOutcome {
    pub q: f64,
    pub v: f64,
    pub h: f64,
}

/// Picks the step from the geometric ladder starting at `h_start`: the
/// largest trial `h ≤ h_cap` whose endpoint residual is within `tol`.
pub(crate) fn ladder_step(
    ws: &mut Workspace,
    params: &CubicParams,
    state: &PhaseState,
    h_start: f64,
    h_cap: f64,
    cfg: &IntegratorConfig,
) -> Result<StepOutcome> {
    ws.expand(params, state);
    let t0 = state.t;
    let mut h = h_start.min(h_cap);
    let (mut q, mut v, res) = ws.probe(params, t0, h);
    if res <= cfg.tol {
        while h < h_cap {
            let trial = (h * STEP_LADDER).min(h_cap);
            let (q2, v2, r2) = ws.probe(params, t0, trial);
            if r2 > cfg.tol {
                break;
            }
            h = trial;
            q = q2;
            v = v2;
        }
    } else {
        loop {
            h /= STEP_LADDER;
            if h < cfg.min_step {
                return Err(Error::StepUnderflow { t: t0, h });
            }
            let (q2, v2, r2) = ws.probe(params, t0, h);
            if r2 <= cfg.tol {
                q = q2;
                v = v2;
                break;
            }
        }
    }
    Ok(StepOutcome { q, v, h })
}

/// Largest step allowed from `t`: `max_step`, shortened so the step does
/// not cross the knee of a linear ramp.
pub(crate) fn step_cap(schedule: &DampingSchedule, t: f64, max_step: f64) -> f64 {
    match schedule.knee() {
        Some(knee) if t < knee => max_step.min(knee - t),
        _ => max_step,
    }
}

/// One series step from `state`, starting the ladder at `h_prev`.
pub fn taylor_step(
    model: &Model,
    state: &PhaseState,
    cfg: &IntegratorConfig,
    h_prev: f64,
) -> Result<(PhaseState, f64)> {
    let params = cubic_params(model)?;
    cfg.validate()?;
    let mut ws = Workspace::new(cfg.series_order);
    let cap = step_cap(&params.schedule, state.t, cfg.max_step);
    let out = ladder_step(&mut ws, params, state, h_prev, cap, cfg)?;
    let next = PhaseState {
        q: out.q,
        v: out.v,
        t: state.t + out.h,
    };
    if !next.is_finite() {
        return Err(Error::NonFinite { t: next.t });
    }
    Ok((next, out.h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic(eps: f64, schedule: DampingSchedule) -> Model {
        Model::Cubic(CubicParams::new(eps, schedule).unwrap())
    }

    fn free() -> Model {
        Model::Cubic(CubicParams {
            epsilon: 0.0,
            schedule: DampingSchedule::Constant { gamma0: 0.0 },
        })
    }

    #[test]
    fn unperturbed_low_order_coefficients() {
        let s = taylor_recurrence(&free(), &PhaseState { q: 1.0, v: 0.0, t: 0.0 }, 25).unwrap();
        assert_eq!(s.q[0], 1.0);
        assert_eq!(s.q[1], 0.0);
        assert_eq!(s.q[2], -0.5);
        assert_eq!(s.q[3], 0.0);
        // q'''' = −6 q q'² − 3 q² q'' = 3 at t = 0, so q_4 = 1/8
        assert!((s.q[4] - 0.125).abs() < 1e-16);
        assert_eq!(s.v[0], 0.0);
        assert_eq!(s.v[1], -1.0);
    }

    #[test]
    fn rejects_low_order_and_spin_orbit() {
        let st = PhaseState { q: 1.0, v: 0.0, t: 0.0 };
        assert!(taylor_recurrence(&free(), &st, 3).is_err());
        let so = Model::SpinOrbit(
            crate::models::SpinOrbitParams::new(0.1, 0.01, DampingSchedule::constant(0.01).unwrap())
                .unwrap(),
        );
        assert!(matches!(
            taylor_recurrence(&so, &st, 25),
            Err(Error::Unsupported(_))
        ));
    }

    /// Series of q'' + (1 + ε cos t) q³ + γ(t) q' built by independent
    /// truncated-series arithmetic must vanish through order − 2.
    #[test]
    fn ode_satisfied_order_by_order() {
        let models = [
            cubic(0.1, DampingSchedule::constant(0.01).unwrap()),
            cubic(0.3, DampingSchedule::linear_ramp(0.02, 1.0).unwrap()),
            cubic(0.2, DampingSchedule::exp_ramp(0.05, 0.5).unwrap()),
        ];
        let order = 20;
        for m in &models {
            let st = PhaseState { q: 0.7, v: -0.4, t: 3.1 };
            let s = taylor_recurrence(m, &st, order).unwrap();
            let n = order;
            let mul = |a: &[f64], b: &[f64]| -> Vec<f64> {
                (0..n)
                    .map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum())
                    .collect()
            };
            let q = &s.q[..n];
            let q3 = mul(&mul(q, q), q);
            let mut cos = vec![0.0; n];
            let mut f = 1.0;
            for k in 0..n {
                if k > 0 {
                    f *= k as f64;
                }
                cos[k] = (st.t + k as f64 * std::f64::consts::FRAC_PI_2).cos() / f;
            }
            let mut gamma = vec![0.0; n];
            m.schedule().series(st.t, &mut gamma);
            let dq: Vec<f64> = (0..n).map(|k| (k + 1) as f64 * s.q[k + 1]).collect();
            let ddq: Vec<f64> = (0..n - 1).map(|k| (k + 1) as f64 * dq[k + 1]).collect();
            let cq3 = mul(&cos, &q3);
            let gdq = mul(&gamma, &dq);
            for k in 0..n - 1 {
                let r = ddq[k] + q3[k] + m.epsilon() * cq3[k] + gdq[k];
                assert!(r.abs() < 1e-13, "order {k}: {r}");
            }
        }
    }

    #[test]
    fn residual_shrinks_with_step() {
        let m = cubic(0.1, DampingSchedule::constant(0.01).unwrap());
        let Model::Cubic(p) = m else { unreachable!() };
        let st = PhaseState { q: 0.9, v: 0.3, t: 1.0 };
        let mut ws = Workspace::new(25);
        ws.expand(&p, &st);
        let mut prev = f64::INFINITY;
        let mut h = 2.0;
        // down to the rounding floor
        while h > 1e-3 {
            let (_, _, r) = ws.probe(&p, st.t, h);
            if r < 1e-14 {
                break;
            }
            assert!(r <= prev, "h {h}: {r} > {prev}");
            prev = r;
            h /= 1.3;
        }
    }

    #[test]
    fn quiescent_state_takes_max_step() {
        let m = cubic(0.1, DampingSchedule::constant(0.001).unwrap());
        let cfg = IntegratorConfig::default();
        let st = PhaseState { q: 1e-4, v: 0.0, t: 0.0 };
        let (_, h) = taylor_step(&m, &st, &cfg, cfg.max_step).unwrap();
        assert_eq!(h, cfg.max_step);
    }

    #[test]
    fn tighter_tolerance_never_longer_step() {
        let m = cubic(0.1, DampingSchedule::constant(0.01).unwrap());
        let loose = IntegratorConfig::default();
        let tight = IntegratorConfig {
            tol: loose.tol / 10.0,
            ..loose
        };
        for (q, v, t) in [(0.8, 0.1, 0.0), (-0.3, 0.6, 2.0), (1.0, 1.0, 5.0)] {
            let st = PhaseState { q, v, t };
            let (_, h1) = taylor_step(&m, &st, &loose, 1.0).unwrap();
            let (_, h2) = taylor_step(&m, &st, &tight, 1.0).unwrap();
            assert!(h2 <= h1);
        }
    }

    #[test]
    fn step_never_crosses_knee() {
        let m = cubic(0.1, DampingSchedule::linear_ramp(0.01, 0.05).unwrap());
        let cfg = IntegratorConfig::default();
        let knee = m.schedule().knee().unwrap();
        let st = PhaseState { q: 1e-3, v: 0.0, t: knee - 0.5 };
        let (next, h) = taylor_step(&m, &st, &cfg, 10.0).unwrap();
        assert!(h <= 0.5 + 1e-15);
        assert!(next.t <= knee + 1e-12);
    }
}
