//! Eccentricity expansion of the spin-orbit potential
//! `g(θ, t) = Σ_k a_k(e) cos(2θ − k t)`, truncated at O(e⁶).

use crate::error::{invalid, Result};

/// Lowest and highest harmonic index with a non-zero coefficient.
pub const K_MIN: i32 = -3;
pub const K_MAX: i32 = 7;
const N_HARMONICS: usize = (K_MAX - K_MIN + 1) as usize;

/// `(power of e, numerator, denominator)`.
type Term = (i32, i64, i64);

/// Exact rational coefficients, indexed by `k - K_MIN`. `k = 0` is empty.
const TERMS: [&[Term]; N_HARMONICS] = [
    &[(5, -81, 2560)],                          // k = -3
    &[(4, 1, 48)],                              // k = -2
    &[(3, -1, 96), (5, -11, 1536)],             // k = -1
    &[],                                        // k = 0
    &[(1, 1, 4), (3, -1, 32), (5, 5, 768)],     // k = 1
    &[(0, 1, 2), (2, -5, 4), (4, 13, 32)],      // k = 2
    &[(1, -7, 4), (3, 123, 32), (5, -489, 256)], // k = 3
    &[(2, 17, 4), (4, -115, 12)],               // k = 4
    &[(3, -845, 96), (5, 32525, 1536)],         // k = 5
    &[(4, 533, 32)],                            // k = 6
    &[(5, -228347, 7680)],                      // k = 7
];

/// Largest eccentricity accepted for the truncated expansion.
pub const MAX_ECCENTRICITY: f64 = 0.5;

/// The coefficients `a_k(e)` evaluated at one eccentricity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierPolynomial {
    eccentricity: f64,
    coeffs: [f64; N_HARMONICS],
}

impl FourierPolynomial {
    pub fn new(eccentricity: f64) -> Result<Self> {
        if !(0.0..=MAX_ECCENTRICITY).contains(&eccentricity) {
            return Err(invalid(
                "eccentricity",
                format!("must lie in [0, {MAX_ECCENTRICITY}], got {eccentricity}"),
            ));
        }
        let mut coeffs = [0.0; N_HARMONICS];
        for (c, terms) in coeffs.iter_mut().zip(TERMS.iter()) {
            *c = terms
                .iter()
                .map(|&(pow, num, den)| (num as f64 / den as f64) * eccentricity.powi(pow))
                .sum();
        }
        Ok(Self {
            eccentricity,
            coeffs,
        })
    }

    pub fn eccentricity(&self) -> f64 {
        self.eccentricity
    }

    /// `a_k(e)`; zero outside `K_MIN..=K_MAX` and at `k = 0`.
    pub fn a(&self, k: i32) -> f64 {
        if (K_MIN..=K_MAX).contains(&k) {
            self.coeffs[(k - K_MIN) as usize]
        } else {
            0.0
        }
    }

    /// Non-trivial harmonics `(k, a_k)`, including those that vanish at this `e`.
    pub fn harmonics(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        (K_MIN..=K_MAX)
            .filter(|&k| k != 0)
            .map(move |k| (k, self.a(k)))
    }

    pub(crate) fn raw(&self) -> &[f64; N_HARMONICS] {
        &self.coeffs
    }
}
