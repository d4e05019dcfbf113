use crate::error::{invalid, Result};

/// Time law of the damping coefficient γ(t).
///
/// The ramped laws reach (or approach) `gamma0` over the ramp time
/// `T0 = delta / gamma0`; `delta = 0` makes both of them identical to
/// [`DampingSchedule::Constant`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingSchedule {
    Constant { gamma0: f64 },
    /// γ0·t/T0 up to the knee at `T0`, γ0 afterwards.
    LinearRamp { gamma0: f64, delta: f64 },
    /// γ0·(1 − exp(−t/T0)).
    ExpRamp { gamma0: f64, delta: f64 },
}

fn check(gamma0: f64, delta: f64) -> Result<()> {
    if !(gamma0.is_finite() && gamma0 > 0.0) {
        return Err(invalid("gamma0", format!("must be finite and > 0, got {gamma0}")));
    }
    if !(delta.is_finite() && delta >= 0.0) {
        return Err(invalid("delta", format!("must be finite and >= 0, got {delta}")));
    }
    Ok(())
}

impl DampingSchedule {
    pub fn constant(gamma0: f64) -> Result<Self> {
        check(gamma0, 0.0)?;
        Ok(Self::Constant { gamma0 })
    }

    pub fn linear_ramp(gamma0: f64, delta: f64) -> Result<Self> {
        check(gamma0, delta)?;
        Ok(Self::LinearRamp { gamma0, delta })
    }

    pub fn exp_ramp(gamma0: f64, delta: f64) -> Result<Self> {
        check(gamma0, delta)?;
        Ok(Self::ExpRamp { gamma0, delta })
    }

    pub fn validate(&self) -> Result<()> {
        check(self.gamma0(), self.delta())
    }

    pub fn gamma0(&self) -> f64 {
        match *self {
            Self::Constant { gamma0 }
            | Self::LinearRamp { gamma0, .. }
            | Self::ExpRamp { gamma0, .. } => gamma0,
        }
    }

    pub fn delta(&self) -> f64 {
        match *self {
            Self::Constant { .. } => 0.0,
            Self::LinearRamp { delta, .. } | Self::ExpRamp { delta, .. } => delta,
        }
    }

    /// Ramp time `T0 = Δ/γ0`; zero for a constant schedule.
    pub fn ramp_time(&self) -> f64 {
        self.delta() / self.gamma0()
    }

    /// Same law with a different final value, keeping Δ.
    pub fn with_gamma0(&self, gamma0: f64) -> Result<Self> {
        match *self {
            Self::Constant { .. } => Self::constant(gamma0),
            Self::LinearRamp { delta, .. } => Self::linear_ramp(gamma0, delta),
            Self::ExpRamp { delta, .. } => Self::exp_ramp(gamma0, delta),
        }
    }

    /// Same law with a different Δ. A constant schedule becomes a linear ramp.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        match *self {
            Self::Constant { gamma0 } | Self::LinearRamp { gamma0, .. } => {
                Self::linear_ramp(gamma0, delta)
            }
            Self::ExpRamp { gamma0, .. } => Self::exp_ramp(gamma0, delta),
        }
    }

    /// Time at which the law stops being analytic (the linear ramp's knee).
    pub fn knee(&self) -> Option<f64> {
        match *self {
            Self::LinearRamp { delta, gamma0 } if delta > 0.0 => Some(delta / gamma0),
            _ => None,
        }
    }

    /// γ(t) for `t >= 0`.
    pub fn at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(invalid("t", format!("damping time must be >= 0, got {t}")));
        }
        Ok(self.value(t))
    }

    /// Unchecked evaluation; negative times are clamped to the start of the ramp.
    #[inline]
    pub(crate) fn value(&self, t: f64) -> f64 {
        match *self {
            Self::Constant { gamma0 } => gamma0,
            Self::LinearRamp { gamma0, delta } => {
                let t0 = delta / gamma0;
                if t < t0 {
                    gamma0 * t.max(0.0) / t0
                } else {
                    gamma0
                }
            }
            Self::ExpRamp { gamma0, delta } => {
                if delta == 0.0 {
                    gamma0
                } else {
                    let t0 = delta / gamma0;
                    -gamma0 * (-t.max(0.0) / t0).exp_m1()
                }
            }
        }
    }

    /// ∫ γ(s) ds over `[t1, t2]`, both non-negative.
    pub fn integral(&self, t1: f64, t2: f64) -> f64 {
        let primitive = |t: f64| -> f64 {
            let t = t.max(0.0);
            match *self {
                Self::Constant { gamma0 } => gamma0 * t,
                Self::LinearRamp { gamma0, delta } => {
                    let t0 = delta / gamma0;
                    if t < t0 {
                        0.5 * gamma0 * t * t / t0
                    } else {
                        0.5 * delta + gamma0 * (t - t0)
                    }
                }
                Self::ExpRamp { gamma0, delta } => {
                    if delta == 0.0 {
                        gamma0 * t
                    } else {
                        let t0 = delta / gamma0;
                        // γ0 t − Δ (1 − e^{−t/T0})
                        gamma0 * t + delta * (-t / t0).exp_m1()
                    }
                }
            }
        };
        primitive(t2) - primitive(t1)
    }

    /// Taylor coefficients of γ(t0 + τ) in τ, written into `out`.
    ///
    /// For the linear ramp the caller must keep the expansion interval on one
    /// side of the knee.
    pub(crate) fn series(&self, t0: f64, out: &mut [f64]) {
        out.iter_mut().for_each(|c| *c = 0.0);
        if out.is_empty() {
            return;
        }
        match *self {
            Self::Constant { gamma0 } => out[0] = gamma0,
            Self::LinearRamp { gamma0, delta } => {
                let ramp = delta / gamma0;
                if t0 < ramp {
                    out[0] = gamma0 * t0 / ramp;
                    if out.len() > 1 {
                        out[1] = gamma0 / ramp;
                    }
                } else {
                    out[0] = gamma0;
                }
            }
            Self::ExpRamp { gamma0, delta } => {
                if delta == 0.0 {
                    out[0] = gamma0;
                    return;
                }
                let ramp = delta / gamma0;
                let decay = gamma0 * (-t0 / ramp).exp();
                out[0] = gamma0 - decay;
                let mut term = -decay;
                for (k, c) in out.iter_mut().enumerate().skip(1) {
                    term *= -1.0 / (ramp * k as f64);
                    *c = term;
                }
            }
        }
    }

    /// Stable description for fingerprints. Ramps with `delta = 0` describe
    /// the same law as a constant schedule and render identically.
    pub(crate) fn canonical(&self) -> String {
        if self.delta() == 0.0 {
            return format!("constant(gamma0={:?})", self.gamma0());
        }
        match *self {
            Self::Constant { gamma0 } => format!("constant(gamma0={gamma0:?})"),
            Self::LinearRamp { gamma0, delta } => {
                format!("linear(gamma0={gamma0:?},delta={delta:?})")
            }
            Self::ExpRamp { gamma0, delta } => format!("exp(gamma0={gamma0:?},delta={delta:?})"),
        }
    }
}

/// γ(t) of `schedule`; rejects negative times.
pub fn damping_at(schedule: &DampingSchedule, t: f64) -> Result<f64> {
    schedule.at(t)
}
