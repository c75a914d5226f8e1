//! Physical constants used throughout the crate.
//!
//! All numerical output of the library is a deterministic function of these
//! values, so they live in one place and are never shadowed locally.

/// Reduced Planck constant, J·s (CODATA 2018).
pub const HBAR: f64 = 1.054571817e-34;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299792458.0;

/// Elementary charge, C (exact). Used to convert photon energies in eV
/// to angular frequencies.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

/// Angular frequency (rad/s) of a photon with the given energy in eV.
pub fn omega_from_ev(energy_ev: f64) -> f64 {
    energy_ev * ELEMENTARY_CHARGE / HBAR
}

/// Angular frequency (rad/s) of a photon with the given vacuum wavelength in m.
pub fn omega_from_wavelength(lambda: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / lambda
}
