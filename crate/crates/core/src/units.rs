//! Unit conventions and conversions used across the crate.
//!
//! Internal conventions: lengths along the structure and displacement axes in
//! micrometers, optical wavelengths in nanometers at API boundaries (micrometers
//! inside dispersion formulas), angular frequency in rad/s, phase mismatch in
//! rad/µm. Keeping the speed of light in µm/s makes `omega / c` come out in
//! rad/µm directly.

/// Speed of light in vacuum, µm/s.
pub const SPEED_OF_LIGHT_UM_PER_S: f64 = 2.99792458e14;

/// Angular frequency (rad/s) of light with the given vacuum wavelength in nm.
pub fn omega_from_wavelength_nm(wavelength_nm: f64) -> f64 {
    2.0 * core::f64::consts::PI * SPEED_OF_LIGHT_UM_PER_S / (wavelength_nm * 1e-3)
}

/// Vacuum wavelength in nm of light with the given angular frequency in rad/s.
pub fn wavelength_nm_from_omega(omega_rad_s: f64) -> f64 {
    2.0 * core::f64::consts::PI * SPEED_OF_LIGHT_UM_PER_S / omega_rad_s * 1e3
}

/// Vacuum wavelength in µm of light with the given angular frequency in rad/s.
pub fn wavelength_um_from_omega(omega_rad_s: f64) -> f64 {
    2.0 * core::f64::consts::PI * SPEED_OF_LIGHT_UM_PER_S / omega_rad_s
}
