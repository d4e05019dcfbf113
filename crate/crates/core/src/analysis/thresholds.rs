//! Leading-order damping thresholds of subharmonic orbits.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;

use super::elliptic::{cubic_amplitude, jacobi_elliptic, CUBIC_MODULUS};
use crate::error::{invalid, Error, Result};
use crate::models::{FourierPolynomial, PhaseState, K_MAX, K_MIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMethod {
    Analytic,
    Table,
    Bisection,
}

impl ThresholdMethod {
    pub fn name(&self) -> &'static str {
        match self {
            ThresholdMethod::Analytic => "analytic",
            ThresholdMethod::Table => "table",
            ThresholdMethod::Bisection => "bisection",
        }
    }
}

/// Threshold `γ(ω, ε) ≈ C0 ε^n` of the `p:q` resonance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdEstimate {
    pub p: i64,
    pub q: u32,
    /// Non-negative; infinite when no damping destroys the orbit.
    pub c0: f64,
    pub n_order: u32,
    pub method: ThresholdMethod,
    /// Final `[γ_lo, γ_hi]` of a bisection.
    pub bracket: Option<(f64, f64)>,
}

impl ThresholdEstimate {
    pub fn omega(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    pub fn gamma_threshold(&self, epsilon: f64) -> f64 {
        self.c0 * epsilon.powi(self.n_order as i32)
    }
}

/// Rows `p,q,omega,C0,n_order,method,gamma_thr` for the given `ε`.
pub fn threshold_csv(estimates: &[ThresholdEstimate], epsilon: f64) -> String {
    let mut s = String::from("p,q,omega,C0,n_order,method,gamma_thr\n");
    for e in estimates {
        let _ = writeln!(
            s,
            "{},{},{:?},{:?},{},{},{:?}",
            e.p,
            e.q,
            e.omega(),
            e.c0,
            e.n_order,
            e.method.name(),
            e.gamma_threshold(epsilon)
        );
    }
    s
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn check_ratio(p: i64, q: u32) -> Result<()> {
    if q == 0 {
        return Err(invalid("q", "must be >= 1"));
    }
    if gcd(p.unsigned_abs(), q as u64) != 1 {
        return Err(invalid("p", format!("{p}/{q} is not in lowest terms")));
    }
    Ok(())
}

/// Harmonic index `k = 2p/q` locking onto the `p:q` spin-orbit resonance,
/// when it is one of the expansion's harmonics.
fn locking_harmonic(p: i64, q: u32) -> Option<i32> {
    let twice = 2 * p;
    if twice % q as i64 != 0 {
        return None;
    }
    let k = twice / q as i64;
    (k != 0 && (K_MIN as i64..=K_MAX as i64).contains(&k)).then_some(k as i32)
}

/// Leading-order threshold of the `p:q` spin-orbit resonance,
/// `C0 = 2q |a_{2p/q}(e)| / |p − q|`.
pub fn analytic_threshold_spin_orbit(e: f64, p: i64, q: u32) -> Result<ThresholdEstimate> {
    check_ratio(p, q)?;
    let coeffs = FourierPolynomial::new(e)?;
    let c0 = if p == q as i64 {
        f64::INFINITY
    } else {
        match locking_harmonic(p, q) {
            Some(k) => 2.0 * q as f64 * coeffs.a(k).abs() / (p - q as i64).abs() as f64,
            None => 0.0,
        }
    };
    Ok(ThresholdEstimate {
        p,
        q,
        c0,
        n_order: 1,
        method: ThresholdMethod::Analytic,
        bracket: None,
    })
}

/// Phases `θ0 ∈ [0, π)` of the first-order spin-orbit orbit
/// `θ = θ0 + ωt` at damping ratio `C = γ/ε`, as `[stable, unstable]`.
pub fn theta0_from_c(e: f64, p: i64, q: u32, c: f64) -> Result<[f64; 2]> {
    let est = analytic_threshold_spin_orbit(e, p, q)?;
    if !(c.abs() < est.c0) {
        return Err(Error::NoSubharmonic { c, c0: est.c0 });
    }
    let k = locking_harmonic(p, q).ok_or(Error::NoSubharmonic { c, c0: est.c0 })?;
    let ak = FourierPolynomial::new(e)?.a(k);
    let omega = p as f64 / q as f64;
    let s = c * (omega - 1.0) / (2.0 * ak);
    let a = 0.5 * s.asin();
    let b = FRAC_PI_2 - a;
    let wrap = |x: f64| x.rem_euclid(PI);
    // small oscillations about θ0 obey φ'' = 4ε a_k cos(2θ0) φ
    if ak * (2.0 * a).cos() < 0.0 {
        Ok([wrap(a), wrap(b)])
    } else {
        Ok([wrap(b), wrap(a)])
    }
}

/// Period-averaged spin-orbit energy balance `M(θ0)` over `2πq` for the
/// trial orbit `θ = θ0 + ωt`, with the damping ratio `C`.
pub fn spin_orbit_melnikov(e: f64, p: i64, q: u32, c: f64, theta0: f64) -> Result<f64> {
    check_ratio(p, q)?;
    let coeffs = FourierPolynomial::new(e)?;
    let omega = p as f64 / q as f64;
    let period = TAU * q as f64;
    let n = 4096 * q as usize;
    let h = period / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let t = i as f64 * h;
        let theta = theta0 + omega * t;
        let g: f64 = coeffs
            .harmonics()
            .map(|(k, a)| a * (2.0 * theta - k as f64 * t).sin())
            .sum();
        sum += 2.0 * g - c * (omega - 1.0);
    }
    Ok(sum * h)
}

/// Primary (`n = 1`) and secondary (`n = 2`) cubic resonances `1/q`.
const CUBIC_TABLE: [(u32, f64, u32); 10] = [
    (2, 0.178442, 1),
    (4, 0.061574, 1),
    (6, 0.008980, 1),
    (8, 0.000920, 1),
    (10, 0.000078, 1),
    (1, 0.146322, 2),
    (3, 0.065001, 2),
    (5, 0.006488, 2),
    (7, 0.000177, 2),
    (9, 0.000002, 2),
];

/// Tabulated threshold constant of the cubic `p:q` resonance.
pub fn cubic_threshold_reference(p: i64, q: u32) -> Result<ThresholdEstimate> {
    let row = (p == 1)
        .then(|| CUBIC_TABLE.iter().find(|r| r.0 == q))
        .flatten()
        .ok_or(Error::NotTabulated { p, q })?;
    Ok(ThresholdEstimate {
        p,
        q,
        c0: row.1,
        n_order: row.2,
        method: ThresholdMethod::Table,
        bracket: None,
    })
}

/// Order `n(ω)` of the cubic resonance `1/q`: first for even `q`, second for odd.
pub fn cubic_order(p: i64, q: u32) -> u32 {
    if p == 1 && q % 2 == 0 {
        1
    } else {
        2
    }
}

/// `(∫ cos s x⁴ ds, ∫ ẋ² ds)` over `[0, 2πq]` along `x = α cn(αs)`.
fn cubic_orbit_integrals(q: u32) -> (f64, f64) {
    let alpha = cubic_amplitude(1.0 / q as f64);
    let period = TAU * q as f64;
    let n = 4096 * q as usize;
    let h = period / n as f64;
    let (mut c4, mut b) = (0.0, 0.0);
    for i in 0..n {
        let s = i as f64 * h;
        let (cn, sn, dn) = jacobi_elliptic(alpha * s, CUBIC_MODULUS).expect("finite argument");
        let x = alpha * cn;
        let xdot = -alpha * alpha * sn * dn;
        c4 += s.cos() * x.powi(4);
        b += xdot * xdot;
    }
    (c4 * h, b * h)
}

fn check_primary(p: i64, q: u32) -> Result<()> {
    if p != 1 || q % 2 != 0 || q == 0 {
        return Err(invalid(
            "q",
            format!("first-order balance needs p = 1 and even q, got {p}/{q}"),
        ));
    }
    Ok(())
}

/// First-order threshold constant of the cubic resonance `1/q` (`q` even)
/// from the energy balance along the unperturbed orbit.
pub fn cubic_first_order_c0(p: i64, q: u32) -> Result<ThresholdEstimate> {
    check_primary(p, q)?;
    let (c4, b) = cubic_orbit_integrals(q);
    Ok(ThresholdEstimate {
        p,
        q,
        c0: c4.abs() / (4.0 * b),
        n_order: 1,
        method: ThresholdMethod::Analytic,
        bracket: None,
    })
}

/// States at `t = 0` on the two first-order cubic orbits
/// `x = α cn(α(t + t0))` whose energy balance vanishes at `(ε, γ)`.
pub fn cubic_melnikov_seeds(p: i64, q: u32, epsilon: f64, gamma: f64) -> Result<[PhaseState; 2]> {
    check_primary(p, q)?;
    let (c4, b) = cubic_orbit_integrals(q);
    // ΔE(t0) = (ε/4) sin t0 ∫cos s x⁴ − γ ∫ẋ²
    let s = 4.0 * gamma * b / (epsilon * c4);
    if !(s.abs() < 1.0) {
        return Err(Error::NoSubharmonic {
            c: gamma / epsilon,
            c0: c4.abs() / (4.0 * b),
        });
    }
    let alpha = cubic_amplitude(1.0 / q as f64);
    let t0 = s.asin();
    let state = |t0: f64| {
        let (cn, sn, dn) = jacobi_elliptic(alpha * t0, CUBIC_MODULUS).expect("finite argument");
        PhaseState {
            q: alpha * cn,
            v: -alpha * alpha * sn * dn,
            t: 0.0,
        }
    };
    Ok([state(t0), state(PI - t0)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_orbit_constants() {
        let m = analytic_threshold_spin_orbit(0.2056, 3, 2).unwrap();
        assert!((m.c0 - 1.308).abs() < 5e-4, "{}", m.c0);
        let moon = analytic_threshold_spin_orbit(0.0549, 2, 1).unwrap();
        assert!((moon.c0 - 2.545e-2).abs() < 2e-5, "{}", moon.c0);
        assert_eq!(analytic_threshold_spin_orbit(0.1, 1, 1).unwrap().c0, f64::INFINITY);
        for (p, q) in [(1, 2), (3, 2), (2, 1), (5, 2), (3, 1)] {
            assert_eq!(analytic_threshold_spin_orbit(0.0, p, q).unwrap().c0, 0.0);
        }
        // 2p/q = 4/3 is not a harmonic
        assert_eq!(analytic_threshold_spin_orbit(0.2, 2, 3).unwrap().c0, 0.0);
        assert!(analytic_threshold_spin_orbit(0.2, 2, 4).is_err());
    }

    #[test]
    fn theta0_pair() {
        let [s, u] = theta0_from_c(0.2056, 3, 2, 0.0).unwrap();
        let mut both = [s, u];
        both.sort_by(f64::total_cmp);
        assert!(both[0].abs() < 1e-15 && (both[1] - FRAC_PI_2).abs() < 1e-15);

        let c0 = analytic_threshold_spin_orbit(0.2056, 3, 2).unwrap().c0;
        let [s, u] = theta0_from_c(0.2056, 3, 2, c0 * (1.0 - 1e-10)).unwrap();
        assert!((s - u).abs() < 1e-4);
        assert!(((2.0 * s).sin().abs() - 1.0).abs() < 1e-9);
        assert!(matches!(
            theta0_from_c(0.2056, 3, 2, c0 * 1.01),
            Err(Error::NoSubharmonic { .. })
        ));
    }

    #[test]
    fn theta0_zeroes_the_energy_balance() {
        let (e, c) = (0.2056, 0.654);
        let [s, u] = theta0_from_c(e, 3, 2, c).unwrap();
        let a3 = FourierPolynomial::new(e).unwrap().a(3);
        assert!(((2.0 * s).sin() - c * 0.5 / (2.0 * a3)).abs() < 1e-14);
        for th in [s, u] {
            let m = spin_orbit_melnikov(e, 3, 2, c, th).unwrap();
            assert!(m.abs() < 1e-9, "{m}");
        }
        // off the root the balance is O(1)
        assert!(spin_orbit_melnikov(e, 3, 2, c, s + 0.3).unwrap().abs() > 0.1);
    }

    #[test]
    fn cubic_table_lookup() {
        let t = cubic_threshold_reference(1, 2).unwrap();
        assert_eq!((t.c0, t.n_order, t.method), (0.178442, 1, ThresholdMethod::Table));
        assert_eq!(cubic_threshold_reference(1, 1).unwrap().n_order, 2);
        assert_eq!(cubic_threshold_reference(1, 10).unwrap().c0, 0.000078);
        assert!(matches!(cubic_threshold_reference(1, 12), Err(Error::NotTabulated { .. })));
        assert!(cubic_threshold_reference(3, 2).is_err());
    }

    #[test]
    fn first_order_balance_reproduces_primary_table() {
        for q in [2, 4, 6, 8] {
            let table = cubic_threshold_reference(1, q).unwrap().c0;
            let c0 = cubic_first_order_c0(1, q).unwrap().c0;
            assert!((c0 - table).abs() < 5e-6, "q = {q}: {c0} vs {table}");
        }
        let c0 = cubic_first_order_c0(1, 10).unwrap().c0;
        assert!((c0 - 0.000078).abs() < 1e-6);
        assert!(cubic_first_order_c0(1, 3).is_err());
    }

    #[test]
    fn melnikov_seeds_lie_on_the_resonant_orbit() {
        let [a, b] = cubic_melnikov_seeds(1, 2, 0.1, 0.01).unwrap();
        let alpha = cubic_amplitude(0.5);
        for s in [a, b] {
            let e = 0.5 * s.v * s.v + 0.25 * s.q.powi(4);
            assert!((e - 0.25 * alpha.powi(4)).abs() < 1e-12);
        }
        assert!(cubic_melnikov_seeds(1, 2, 0.1, 0.02).is_err());
    }

    #[test]
    fn csv_rendering() {
        let t = cubic_threshold_reference(1, 2).unwrap();
        let csv = threshold_csv(&[t], 0.1);
        let row = csv.lines().nth(1).unwrap();
        assert!(row.starts_with("1,2,0.5,0.178442,1,table,0.0178442"), "{row}");
    }
}
