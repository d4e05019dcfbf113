//! Vector fields of the driven cubic oscillator and the spin-orbit model.
//!
//! Both are written as first-order systems in `(q, v)` with the forcing
//! period fixed to 2π:
//!
//! ```text
//! cubic:       q' = v,  v' = −(1 + ε cos t) q³ − γ(t) v
//! spin-orbit:  q' = v,  v' = 2ε Σ_k a_k(e) sin(2q − k t) − γ(t) (v − 1)
//! ```
//!
//! The divergence of either field is `−γ(t)`.

mod fourier;
mod schedule;

pub use fourier::{FourierPolynomial, K_MAX, K_MIN, MAX_ECCENTRICITY};
pub use schedule::{damping_at, DampingSchedule};

use crate::error::{invalid, Error, Result};

/// A point of a trajectory. For the spin-orbit model `q` is the lifted
/// angle θ ∈ ℝ; it is never reduced here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub q: f64,
    pub v: f64,
    pub t: f64,
}

impl PhaseState {
    pub fn new(q: f64, v: f64, t: f64) -> Result<Self> {
        let s = Self { q, v, t };
        if !s.is_finite() {
            return Err(Error::NonFinite { t });
        }
        Ok(s)
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.v.is_finite() && self.t.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicParams {
    pub epsilon: f64,
    pub schedule: DampingSchedule,
}

impl CubicParams {
    pub fn new(epsilon: f64, schedule: DampingSchedule) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
        }
        schedule.validate()?;
        Ok(Self { epsilon, schedule })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOrbitParams {
    pub epsilon: f64,
    pub schedule: DampingSchedule,
    coeffs: FourierPolynomial,
}

impl SpinOrbitParams {
    pub fn new(eccentricity: f64, epsilon: f64, schedule: DampingSchedule) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
        }
        schedule.validate()?;
        Ok(Self {
            epsilon,
            schedule,
            coeffs: FourierPolynomial::new(eccentricity)?,
        })
    }

    pub fn eccentricity(&self) -> f64 {
        self.coeffs.eccentricity()
    }

    pub fn coeffs(&self) -> &FourierPolynomial {
        &self.coeffs
    }

    /// `(Σ a_k sin(2θ − kt), Σ a_k cos(2θ − kt))`.
    #[inline]
    fn harmonic_sums(&self, theta: f64, t: f64) -> (f64, f64) {
        let (s2, c2) = (2.0 * theta).sin_cos();
        let (s1, c1) = t.sin_cos();
        let a = self.coeffs.raw();
        // cos(kt), sin(kt) for k = 0..=7 by the angle-addition recurrence.
        let mut ck = [0.0; 8];
        let mut sk = [0.0; 8];
        ck[0] = 1.0;
        for k in 1..8 {
            ck[k] = ck[k - 1] * c1 - sk[k - 1] * s1;
            sk[k] = sk[k - 1] * c1 + ck[k - 1] * s1;
        }
        let mut sum_c = 0.0;
        let mut sum_s = 0.0;
        for (i, &ak) in a.iter().enumerate() {
            let k = i as i32 + K_MIN;
            let m = k.unsigned_abs() as usize;
            let sign = if k < 0 { -1.0 } else { 1.0 };
            sum_c += ak * ck[m];
            sum_s += ak * sign * sk[m];
        }
        // sin(2θ − kt) = s2 cos kt − c2 sin kt,  cos(2θ − kt) = c2 cos kt + s2 sin kt
        (s2 * sum_c - c2 * sum_s, c2 * sum_c + s2 * sum_s)
    }
}

/// `(dq, dv)` of the driven cubic oscillator.
#[inline]
pub fn cubic_rhs(state: &PhaseState, params: &CubicParams) -> (f64, f64) {
    let q3 = state.q * state.q * state.q;
    let gamma = params.schedule.value(state.t);
    (
        state.v,
        -(1.0 + params.epsilon * state.t.cos()) * q3 - gamma * state.v,
    )
}

/// `(dq, dv)` of the spin-orbit model with tidal friction.
#[inline]
pub fn spin_orbit_rhs(state: &PhaseState, params: &SpinOrbitParams) -> (f64, f64) {
    let (sin_sum, _) = params.harmonic_sums(state.q, state.t);
    let gamma = params.schedule.value(state.t);
    (
        state.v,
        2.0 * params.epsilon * sin_sum - gamma * (state.v - 1.0),
    )
}

/// The invariant `v²/2 + q⁴/4` of the unperturbed cubic oscillator.
pub fn energy(state: &PhaseState) -> f64 {
    0.5 * state.v * state.v + 0.25 * state.q.powi(4)
}

/// Smallest constant damping above which the origin attracts every
/// trajectory of the cubic oscillator: `max_t ε sin t / (2(1 + ε cos t))`.
pub fn global_attraction_bound(epsilon: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(invalid("epsilon", format!("must lie in [0, 1), got {epsilon}")));
    }
    Ok(epsilon / (2.0 * (1.0 - epsilon * epsilon).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Cubic,
    SpinOrbit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Cubic(CubicParams),
    SpinOrbit(SpinOrbitParams),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Cubic(_) => ModelKind::Cubic,
            Model::SpinOrbit(_) => ModelKind::SpinOrbit,
        }
    }

    pub fn schedule(&self) -> &DampingSchedule {
        match self {
            Model::Cubic(p) => &p.schedule,
            Model::SpinOrbit(p) => &p.schedule,
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            Model::Cubic(p) => p.epsilon,
            Model::SpinOrbit(p) => p.epsilon,
        }
    }

    pub fn with_schedule(&self, schedule: DampingSchedule) -> Self {
        let mut m = *self;
        match &mut m {
            Model::Cubic(p) => p.schedule = schedule,
            Model::SpinOrbit(p) => p.schedule = schedule,
        }
        m
    }

    #[inline]
    pub fn rhs(&self, state: &PhaseState) -> (f64, f64) {
        match self {
            Model::Cubic(p) => cubic_rhs(state, p),
            Model::SpinOrbit(p) => spin_orbit_rhs(state, p),
        }
    }

    /// Jacobian of the field with respect to `(q, v)`.
    #[inline]
    pub fn jacobian(&self, state: &PhaseState) -> [[f64; 2]; 2] {
        match self {
            Model::Cubic(p) => {
                let gamma = p.schedule.value(state.t);
                let dq = -3.0 * (1.0 + p.epsilon * state.t.cos()) * state.q * state.q;
                [[0.0, 1.0], [dq, -gamma]]
            }
            Model::SpinOrbit(p) => {
                let gamma = p.schedule.value(state.t);
                let (_, cos_sum) = p.harmonic_sums(state.q, state.t);
                [[0.0, 1.0], [4.0 * p.epsilon * cos_sum, -gamma]]
            }
        }
    }

    /// Stable textual description used for run fingerprints.
    pub fn canonical(&self) -> String {
        match self {
            Model::Cubic(p) => format!(
                "cubic(epsilon={:?},{})",
                p.epsilon,
                p.schedule.canonical()
            ),
            Model::SpinOrbit(p) => format!(
                "spinorbit(e={:?},epsilon={:?},{})",
                p.eccentricity(),
                p.epsilon,
                p.schedule.canonical()
            ),
        }
    }
}
