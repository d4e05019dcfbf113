//! Jacobi elliptic functions by the arithmetic-geometric mean.

use std::f64::consts::FRAC_PI_2;

use crate::error::{invalid, Result};

const MAX_AGM_STEPS: usize = 32;

fn check_modulus(k: f64) -> Result<()> {
    if !(0.0..1.0).contains(&k) {
        return Err(invalid("k", format!("modulus must lie in [0, 1), got {k}")));
    }
    Ok(())
}

/// Complete elliptic integral of the first kind `K(k)` for modulus `k`.
pub fn complete_k(k: f64) -> Result<f64> {
    check_modulus(k)?;
    let (mut a, mut b) = (1.0f64, (1.0 - k * k).sqrt());
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= f64::EPSILON * a {
            break;
        }
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    Ok(FRAC_PI_2 / a)
}

/// `(cn, sn, dn)` of `u` for modulus `k`.
pub fn jacobi_elliptic(u: f64, k: f64) -> Result<(f64, f64, f64)> {
    check_modulus(k)?;
    if !u.is_finite() {
        return Err(invalid("u", format!("must be finite, got {u}")));
    }
    // Descending Landen transformation: record c_n / a_n, then recover the
    // amplitude from phi_N = 2^N a_N u.
    let mut ratios = [0.0f64; MAX_AGM_STEPS];
    let (mut a, mut b, mut c) = (1.0f64, (1.0 - k * k).sqrt(), k);
    let mut n = 0;
    while c.abs() > f64::EPSILON * a && n < MAX_AGM_STEPS {
        let an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        ratios[n] = c / a;
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a * u;
    for &r in ratios[..n].iter().rev() {
        phi = 0.5 * (phi + (r * phi.sin()).asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = (1.0 - k * k * sn * sn).sqrt();
    Ok((cn, sn, dn))
}

/// Modulus of the unperturbed cubic oscillator orbits `x = α cn(αt)`.
pub const CUBIC_MODULUS: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Amplitude `α = 4ωK/(2π)` of the unperturbed orbit with frequency `ω`.
pub fn cubic_amplitude(omega: f64) -> f64 {
    4.0 * omega * complete_k(CUBIC_MODULUS).expect("modulus in range") / std::f64::consts::TAU
}

/// Period average of `sn² cn²` along the unperturbed cubic orbit.
pub fn orbit_mu() -> f64 {
    let k = CUBIC_MODULUS;
    let period = 4.0 * complete_k(k).expect("modulus in range");
    // the integrand is smooth and periodic, so the rectangle rule converges fast
    let n = 2048;
    (0..n)
        .map(|i| {
            let (cn, sn, _) = jacobi_elliptic(period * i as f64 / n as f64, k).expect("finite");
            sn * sn * cn * cn
        })
        .sum::<f64>()
        / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    /// K by composite Simpson on the smooth form ∫₀^{π/2} dφ / √(1 − k² sin²φ).
    fn k_by_quadrature(k: f64) -> f64 {
        let n = 20_000;
        let h = FRAC_PI_2 / n as f64;
        let f = |phi: f64| 1.0 / (1.0 - k * k * phi.sin().powi(2)).sqrt();
        let mut s = f(0.0) + f(FRAC_PI_2);
        for i in 1..n {
            s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn k_matches_quadrature() {
        let k = complete_k(CUBIC_MODULUS).unwrap();
        assert!((k - 1.854_074_677).abs() < 1e-9);
        for m in [0.0, 0.3, 0.7, 0.95] {
            assert!((complete_k(m).unwrap() - k_by_quadrature(m)).abs() < 1e-10, "{m}");
        }
        assert_eq!(complete_k(0.0).unwrap(), FRAC_PI_2);
        assert!(complete_k(1.0).is_err());
        assert!(complete_k(-0.1).is_err());
    }

    #[test]
    fn origin_and_circular_limit() {
        assert_eq!(jacobi_elliptic(0.0, 0.5).unwrap(), (1.0, 0.0, 1.0));
        let (cn, sn, dn) = jacobi_elliptic(0.7, 0.0).unwrap();
        assert!((cn - 0.7f64.cos()).abs() < 1e-15 && (sn - 0.7f64.sin()).abs() < 1e-15);
        assert_eq!(dn, 1.0);
    }

    #[test]
    fn identities_and_periodicity() {
        for k in [0.1, CUBIC_MODULUS, 0.9, 0.999] {
            let kk = complete_k(k).unwrap();
            for i in 0..200 {
                let u = -15.0 + 0.15 * i as f64;
                let (cn, sn, dn) = jacobi_elliptic(u, k).unwrap();
                assert!((sn * sn + cn * cn - 1.0).abs() < 1e-12);
                assert!((dn * dn + k * k * sn * sn - 1.0).abs() < 1e-12);
                let (cn4, sn4, _) = jacobi_elliptic(u + 4.0 * kk, k).unwrap();
                assert!((cn4 - cn).abs() < 1e-10 && (sn4 - sn).abs() < 1e-10);
                let (cnk, _, _) = jacobi_elliptic(kk, k).unwrap();
                assert!(cnk.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn derivative_of_sn_is_cn_dn() {
        let k = CUBIC_MODULUS;
        let h = 1e-5;
        for u in [0.2, 1.1, 2.9, 5.0] {
            let (cn, _, dn) = jacobi_elliptic(u, k).unwrap();
            let (_, sp, _) = jacobi_elliptic(u + h, k).unwrap();
            let (_, sm, _) = jacobi_elliptic(u - h, k).unwrap();
            assert!(((sp - sm) / (2.0 * h) - cn * dn).abs() < 1e-9);
        }
    }

    #[test]
    fn cn_solves_the_cubic_oscillator() {
        // x = α cn(αt) with k² = 1/2 satisfies x'' = −x³
        let alpha = cubic_amplitude(0.5);
        let x = |t: f64| alpha * jacobi_elliptic(alpha * t, CUBIC_MODULUS).unwrap().0;
        let h = 1e-3;
        for t in [0.3, 1.7, 4.0] {
            let xpp = (x(t + h) - 2.0 * x(t) + x(t - h)) / (h * h);
            assert!((xpp + x(t).powi(3)).abs() < 1e-6);
        }
    }

    #[test]
    fn mu_is_a_fraction_of_one_quarter() {
        let mu = orbit_mu();
        assert!(mu > 0.0 && mu < 0.25);
    }
}
