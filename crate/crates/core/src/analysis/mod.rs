//! Resonance thresholds, periodic orbits and their stability, and the
//! physical parameters of spin-orbit systems.

mod elliptic;
mod periodic;
mod satellites;
mod thresholds;

pub use elliptic::{complete_k, cubic_amplitude, jacobi_elliptic, orbit_mu, CUBIC_MODULUS};
pub use periodic::{
    empirical_threshold, find_periodic_orbit, first_order_seeds, flow_with_tangent, monodromy,
    MonodromyResult, ORBIT_RESIDUAL,
};
pub use satellites::{
    gamma_in_inverse_years, parse_satellites, satellite_params_csv, shipped_satellites,
    spin_orbit_params, SatelliteData, SECONDS_PER_YEAR, SHIPPED_SATELLITES,
};
pub use thresholds::{
    analytic_threshold_spin_orbit, cubic_first_order_c0, cubic_melnikov_seeds, cubic_order,
    cubic_threshold_reference, spin_orbit_melnikov, theta0_from_c, threshold_csv,
    ThresholdEstimate, ThresholdMethod,
};
