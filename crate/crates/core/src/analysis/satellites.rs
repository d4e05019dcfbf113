//! Spin-orbit parameters of real primary-satellite systems (CGS units).

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};

/// Julian year in seconds.
pub const SECONDS_PER_YEAR: f64 = 3.15576e7;

/// Shipped data for the six systems of the tables.
pub const SHIPPED_SATELLITES: &str = include_str!("../../data/satellites.csv");

#[derive(Debug, Clone, PartialEq)]
pub struct SatelliteData {
    pub system: String,
    /// Orbital angular velocity (rad/s).
    pub omega_t: f64,
    /// Satellite mass (g).
    pub mass: f64,
    /// Primary mass (g).
    pub primary_mass: f64,
    /// Satellite radius (cm).
    pub radius: f64,
    /// Mean distance (cm).
    pub distance: f64,
    pub k2: f64,
    pub xi: f64,
    pub q_factor: f64,
    pub h2: f64,
}

impl SatelliteData {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_t", self.omega_t),
            ("M", self.mass),
            ("M0", self.primary_mass),
            ("R", self.radius),
            ("rho", self.distance),
            ("k2", self.k2),
            ("xi", self.xi),
            ("Q", self.q_factor),
            ("h2", self.h2),
        ];
        for (name, x) in fields {
            if !(x.is_finite() && x > 0.0) {
                return Err(invalid(
                    "satellite",
                    format!("{}: {name} must be positive, got {x}", self.system),
                ));
            }
        }
        Ok(())
    }

    /// Orbital period `2π/ω_T` in seconds.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega_t
    }

    /// `(R/ρ)³ M0/M`.
    fn tidal_factor(&self) -> f64 {
        (self.radius / self.distance).powi(3) * self.primary_mass / self.mass
    }
}

/// `(ε, γ)` in units where the orbital period is `2π`:
/// `ε = 3h/(2R)` with the tide excursion `h = (3/2) h2 R (R/ρ)³ M0/M`,
/// and `γ = 3k2/(ξQ) (R/ρ)³ M0/M`.
pub fn spin_orbit_params(data: &SatelliteData) -> Result<(f64, f64)> {
    data.validate()?;
    let f = data.tidal_factor();
    let h = 1.5 * data.h2 * data.radius * f;
    let eps = 1.5 * h / data.radius;
    let gamma = 3.0 * data.k2 / (data.xi * data.q_factor) * f;
    Ok((eps, gamma))
}

/// Dimensionless damping converted to a rate in years⁻¹.
pub fn gamma_in_inverse_years(gamma: f64, orbital_period_seconds: f64) -> Result<f64> {
    if !(orbital_period_seconds.is_finite() && orbital_period_seconds > 0.0) {
        return Err(invalid(
            "period",
            format!("must be positive, got {orbital_period_seconds}"),
        ));
    }
    Ok(gamma * std::f64::consts::TAU / orbital_period_seconds * SECONDS_PER_YEAR)
}

const COLUMNS: [&str; 10] = ["system", "omega_t", "M", "M0", "R", "rho", "k2", "xi", "Q", "h2"];

/// Parses a satellite table with a header row. Columns are found by name;
/// extra columns are ignored.
pub fn parse_satellites(text: &str) -> Result<Vec<SatelliteData>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Schema("empty satellite table".into()))?
        .split(',')
        .map(str::trim)
        .collect();
    let mut idx = [0usize; COLUMNS.len()];
    for (slot, name) in idx.iter_mut().zip(COLUMNS) {
        *slot = header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))?;
    }
    lines
        .enumerate()
        .map(|(row, line)| {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let cell = |c: usize| -> Result<&str> {
                cells.get(idx[c]).copied().ok_or_else(|| {
                    Error::Schema(format!("row {}: missing value for `{}`", row + 1, COLUMNS[c]))
                })
            };
            let num = |c: usize| -> Result<f64> {
                cell(c)?.parse().map_err(|_| {
                    Error::Schema(format!(
                        "row {}: column `{}` is not a number",
                        row + 1,
                        COLUMNS[c]
                    ))
                })
            };
            let d = SatelliteData {
                system: cell(0)?.to_string(),
                omega_t: num(1)?,
                mass: num(2)?,
                primary_mass: num(3)?,
                radius: num(4)?,
                distance: num(5)?,
                k2: num(6)?,
                xi: num(7)?,
                q_factor: num(8)?,
                h2: num(9)?,
            };
            d.validate()?;
            Ok(d)
        })
        .collect()
}

pub fn shipped_satellites() -> Vec<SatelliteData> {
    parse_satellites(SHIPPED_SATELLITES).expect("shipped table is well formed")
}

/// Rows `system,epsilon,gamma,period_s,gamma_per_year`.
pub fn satellite_params_csv(data: &[SatelliteData]) -> Result<String> {
    let mut s = String::from("system,epsilon,gamma,period_s,gamma_per_year\n");
    for d in data {
        let (eps, gamma) = spin_orbit_params(d)?;
        let rate = gamma_in_inverse_years(gamma, d.period())?;
        let _ = writeln!(
            s,
            "{},{:.4e},{:.4e},{:.4e},{:.4e}",
            d.system,
            eps,
            gamma,
            d.period(),
            rate
        );
    }
    Ok(s)
}
