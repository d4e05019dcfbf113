//! Trajectory propagation.
//!
//! Two methods are available: an embedded 8(5,3) Runge–Kutta pair and, for
//! the cubic oscillator only, a Taylor-series method whose step is the
//! largest trial step keeping the ODE residual at the step end below `tol`.

pub(crate) mod rk;
mod taylor;

pub use taylor::{taylor_recurrence, taylor_step, SeriesCoefficients, STEP_LADDER};

use crate::error::{invalid, Error, Result};
use crate::models::{Model, PhaseState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    AdaptiveRK,
    TaylorSeries,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::AdaptiveRK => "rk",
            Method::TaylorSeries => "taylor",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk" | "adaptive-rk" => Ok(Method::AdaptiveRK),
            "taylor" | "taylor-series" => Ok(Method::TaylorSeries),
            other => Err(invalid("method", format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub tol: f64,
    pub series_order: usize,
    pub max_step: f64,
    pub min_step: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::TaylorSeries,
            tol: 1e-12,
            series_order: 25,
            max_step: 10.0,
            min_step: 1e-6,
        }
    }
}

impl IntegratorConfig {
    pub fn adaptive_rk() -> Self {
        Self {
            method: Method::AdaptiveRK,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(invalid("tol", format!("must be > 0, got {}", self.tol)));
        }
        if self.series_order < 4 {
            return Err(invalid(
                "series_order",
                format!("must be >= 4, got {}", self.series_order),
            ));
        }
        if !(self.min_step > 0.0 && self.min_step < self.max_step && self.max_step.is_finite()) {
            return Err(invalid(
                "min_step",
                format!(
                    "need 0 < min_step < max_step, got {} and {}",
                    self.min_step, self.max_step
                ),
            ));
        }
        Ok(())
    }

    /// The method actually used for `model`: the spin-orbit field is always
    /// integrated with the Runge–Kutta pair.
    pub fn method_for(&self, model: &Model) -> Method {
        match model {
            Model::SpinOrbit(_) => Method::AdaptiveRK,
            Model::Cubic(_) => self.method,
        }
    }

    pub(crate) fn canonical(&self) -> String {
        format!(
            "integrator(method={},tol={:?},order={},max_step={:?},min_step={:?})",
            self.method.name(),
            self.tol,
            self.series_order,
            self.max_step,
            self.min_step
        )
    }
}

/// Advances one trajectory, carrying the step size from call to call so
/// that repeated short hops (stroboscopic sampling) stay cheap.
#[derive(Debug, Clone)]
pub struct Propagator {
    model: Model,
    cfg: IntegratorConfig,
    engine: Engine,
}

#[derive(Debug, Clone)]
enum Engine {
    Rk(rk::Dop853),
    Taylor { ws: taylor::Workspace, h: f64 },
}

impl Propagator {
    pub fn new(model: &Model, cfg: &IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        let engine = match cfg.method_for(model) {
            Method::AdaptiveRK => Engine::Rk(rk::Dop853::new(cfg.tol, cfg.min_step, cfg.max_step)),
            Method::TaylorSeries => Engine::Taylor {
                ws: taylor::Workspace::new(cfg.series_order),
                h: 1.0f64.min(cfg.max_step),
            },
        };
        Ok(Self {
            model: *model,
            cfg: *cfg,
            engine,
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    /// State at exactly `t_end`.
    pub fn advance(&mut self, state: &PhaseState, t_end: f64) -> Result<PhaseState> {
        if !(t_end >= state.t) {
            return Err(invalid(
                "t_end",
                format!("must be >= start time {}, got {t_end}", state.t),
            ));
        }
        if !state.is_finite() {
            return Err(Error::NonFinite { t: state.t });
        }
        let model = self.model;
        let knee = model.schedule().knee().filter(|&k| k > state.t && k < t_end);
        match &mut self.engine {
            Engine::Rk(stepper) => {
                let mut f = |t: f64, y: &[f64; 2]| {
                    let (dq, dv) = model.rhs(&PhaseState { q: y[0], v: y[1], t });
                    [dq, dv]
                };
                let mut y = [state.q, state.v];
                let mut t = state.t;
                if let Some(k) = knee {
                    y = stepper.solve(&mut f, t, y, k)?;
                    t = k;
                }
                let y = stepper.solve(&mut f, t, y, t_end)?;
                Ok(PhaseState { q: y[0], v: y[1], t: t_end })
            }
            Engine::Taylor { ws, h } => {
                let Model::Cubic(params) = &model else {
                    return Err(Error::Unsupported("the Taylor-series method"));
                };
                let mut s = *state;
                while s.t < t_end {
                    let remaining = t_end - s.t;
                    let cap = taylor::step_cap(&params.schedule, s.t, self.cfg.max_step);
                    let clipped = remaining <= cap;
                    let cap = cap.min(remaining);
                    let out = taylor::ladder_step(ws, params, &s, *h, cap, &self.cfg)?;
                    // Do not let a clipped step shrink the carried step size.
                    if !(out.h == cap && cap < *h) {
                        *h = out.h;
                    }
                    s = PhaseState {
                        q: out.q,
                        v: out.v,
                        t: if clipped && out.h == cap { t_end } else { s.t + out.h },
                    };
                    if !s.is_finite() {
                        return Err(Error::NonFinite { t: s.t });
                    }
                }
                Ok(s)
            }
        }
    }
}

/// State of `model` at exactly `t_end`, starting from `state`.
pub fn integrate_to(
    model: &Model,
    state: &PhaseState,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<PhaseState> {
    Propagator::new(model, cfg)?.advance(state, t_end)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{energy, CubicParams, DampingSchedule, SpinOrbitParams};

    fn conservative() -> Model {
        Model::Cubic(CubicParams {
            epsilon: 0.0,
            schedule: DampingSchedule::Constant { gamma0: 0.0 },
        })
    }

    #[test]
    fn energy_conserved_without_forcing_or_damping() {
        // Runge–Kutta local errors accumulate; the series method does not drift.
        for (cfg, bound) in [
            (IntegratorConfig::default(), 1e-11),
            (IntegratorConfig::adaptive_rk(), 1e-9),
        ] {
            for (q, v) in [(1.0, 0.0), (0.3, -0.8), (-0.9, 0.9)] {
                let s0 = PhaseState { q, v, t: 0.0 };
                let s1 = integrate_to(&conservative(), &s0, 100.0, &cfg).unwrap();
                let (e0, e1) = (energy(&s0), energy(&s1));
                assert!(((e1 - e0) / e0).abs() <= bound, "{cfg:?}: {e0} {e1}");
                assert_eq!(s1.t, 100.0);
            }
        }
    }

    #[test]
    fn free_rotation_is_exact() {
        let m = Model::SpinOrbit(
            SpinOrbitParams::new(0.1, 0.0, DampingSchedule::constant(0.01).unwrap()).unwrap(),
        );
        let s = integrate_to(
            &m,
            &PhaseState { q: 0.0, v: 1.3, t: 0.0 },
            250.0,
            &IntegratorConfig::default(),
        )
        .unwrap();
        // v relaxes towards 1 as 1 + 0.3 e^{−γt}
        let v = 1.0 + 0.3 * (-0.01f64 * 250.0).exp();
        let theta = 250.0 + 0.3 * (1.0 - (-2.5f64).exp()) / 0.01;
        assert!((s.v - v).abs() < 1e-10);
        assert!((s.q - theta).abs() < 1e-8);

        let s = integrate_to(
            &m,
            &PhaseState { q: 0.0, v: 1.0, t: 0.0 },
            300.0,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!((s.q - 300.0).abs() < 1e-9);
    }

    #[test]
    fn taylor_and_rk_agree() {
        let m = Model::Cubic(CubicParams::new(0.1, DampingSchedule::constant(0.01).unwrap()).unwrap());
        let s0 = PhaseState { q: 1.0, v: 1.0, t: 0.0 };
        let a = integrate_to(&m, &s0, 4000.0, &IntegratorConfig::default()).unwrap();
        let b = integrate_to(&m, &s0, 4000.0, &IntegratorConfig::adaptive_rk()).unwrap();
        assert!((a.q - b.q).abs() <= 1e-8, "{a:?} {b:?}");
        assert!((a.v - b.v).abs() <= 1e-8, "{a:?} {b:?}");
    }

    #[test]
    fn time_reversible_without_damping() {
        let m = Model::Cubic(CubicParams {
            epsilon: 0.0,
            schedule: DampingSchedule::Constant { gamma0: 0.0 },
        });
        let s0 = PhaseState { q: 0.6, v: -0.2, t: 0.0 };
        let cfg = IntegratorConfig::default();
        let s1 = integrate_to(&m, &s0, 200.0, &cfg).unwrap();
        // the field is even in t and odd in v, so flipping v runs time backwards
        let back = integrate_to(&m, &PhaseState { q: s1.q, v: -s1.v, t: 0.0 }, 200.0, &cfg).unwrap();
        assert!((back.q - s0.q).abs() < 1e-8);
        assert!((-back.v - s0.v).abs() < 1e-8);
    }

    #[test]
    fn propagator_hops_match_single_call() {
        let m = Model::Cubic(
            CubicParams::new(0.1, DampingSchedule::linear_ramp(0.01, 0.5).unwrap()).unwrap(),
        );
        for cfg in [IntegratorConfig::default(), IntegratorConfig::adaptive_rk()] {
            let s0 = PhaseState { q: 0.4, v: 0.5, t: 0.0 };
            let mut p = Propagator::new(&m, &cfg).unwrap();
            let mut s = s0;
            for k in 1..=50 {
                s = p.advance(&s, 2.0 * std::f64::consts::PI * k as f64).unwrap();
            }
            let direct = integrate_to(&m, &s0, s.t, &cfg).unwrap();
            assert!((s.q - direct.q).abs() < 1e-9);
            assert!((s.v - direct.v).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_config_and_backwards_time() {
        let mut cfg = IntegratorConfig::default();
        cfg.tol = 0.0;
        assert!(cfg.validate().is_err());
        let cfg = IntegratorConfig {
            min_step: 20.0,
            ..IntegratorConfig::default()
        };
        assert!(cfg.validate().is_err());
        let s = PhaseState { q: 0.1, v: 0.0, t: 5.0 };
        assert!(integrate_to(&conservative(), &s, 1.0, &IntegratorConfig::default()).is_err());
    }
}
