//! Basins of attraction of periodically forced dissipative oscillators.
//!
//! The crate covers the driven cubic oscillator
//! `x'' + (1 + ε cos t) x³ + γ(t) x' = 0` and the spin-orbit model with tidal
//! friction, under constant or slowly increasing damping. It provides
//! trajectory integration, attractor classification, Monte Carlo basin
//! estimation, and analytic tools (resonance thresholds, periodic orbits,
//! Floquet multipliers, physical parameters of satellites).

pub mod analysis;
pub mod basin;
pub mod classify;
mod error;
pub mod integrate;
pub mod models;

pub use error::{Error, Result};
