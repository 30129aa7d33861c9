//! Unit conversions.
//!
//! Wavelengths are vacuum wavelengths. Angular frequencies are in rad/fs,
//! wave numbers in rad/um. This module is the only place where wavelength
//! and frequency are converted into each other.

use std::f64::consts::PI;

/// Speed of light in um/fs.
pub const SPEED_OF_LIGHT_UM_PER_FS: f64 = 0.299_792_458;

/// Angular frequency (rad/fs) of a vacuum wavelength given in um.
pub fn omega_from_um(lambda_um: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT_UM_PER_FS / lambda_um
}

/// Vacuum wavelength (um) of an angular frequency in rad/fs.
pub fn um_from_omega(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT_UM_PER_FS / omega
}

pub fn omega_from_nm(lambda_nm: f64) -> f64 {
    omega_from_um(lambda_nm * 1e-3)
}

pub fn nm_from_omega(omega: f64) -> f64 {
    um_from_omega(omega) * 1e3
}

/// Gaussian amplitude width `sigma` (rad/fs) of a pump whose spectral
/// intensity has a full width at half maximum of `fwhm_nm` around `center_nm`.
///
/// The envelope `exp(-(d/sigma)^2 / 2)` is an amplitude; its intensity
/// `exp(-(d/sigma)^2)` has FWHM `2 sigma sqrt(ln 2)`. The wavelength width is
/// mapped to frequency with `|d omega| = 2 pi c |d lambda| / lambda^2`.
pub fn sigma_from_fwhm_nm(center_nm: f64, fwhm_nm: f64) -> f64 {
    let center_um = center_nm * 1e-3;
    let fwhm_omega = 2.0 * PI * SPEED_OF_LIGHT_UM_PER_FS * (fwhm_nm * 1e-3) / (center_um * center_um);
    fwhm_omega / (2.0 * std::f64::consts::LN_2.sqrt())
}

/// Inverse of [`sigma_from_fwhm_nm`].
pub fn fwhm_nm_from_sigma(center_nm: f64, sigma: f64) -> f64 {
    let center_um = center_nm * 1e-3;
    let fwhm_omega = sigma * 2.0 * std::f64::consts::LN_2.sqrt();
    fwhm_omega * center_um * center_um / (2.0 * PI * SPEED_OF_LIGHT_UM_PER_FS) * 1e3
}

/// Idler wavelength fixed by energy conservation, `1/ls + 1/li = 1/lp`.
pub fn idler_for(pump_nm: f64, signal_nm: f64) -> f64 {
    1.0 / (1.0 / pump_nm - 1.0 / signal_nm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn omega_wavelength_roundtrip() {
        let w = omega_from_nm(810.0);
        assert_relative_eq!(nm_from_omega(w), 810.0, max_relative = 1e-14);
        // 2 pi c / 1 um
        assert_relative_eq!(omega_from_um(1.0), 1.883_651_567_308_853, max_relative = 1e-12);
    }

    #[test]
    fn pump_bandwidth_conversion() {
        // 0.53 nm at 405 nm: d omega = 2 pi c * 0.53e-3 / 0.405^2 rad/fs
        let fwhm_omega = 2.0 * PI * 0.299_792_458 * 0.53e-3 / (0.405 * 0.405);
        let sigma = sigma_from_fwhm_nm(405.0, 0.53);
        assert_relative_eq!(sigma * 2.0 * (2f64.ln()).sqrt(), fwhm_omega, max_relative = 1e-14);
        assert_relative_eq!(sigma, 3.655_305_402e-3, max_relative = 1e-8);
        assert_relative_eq!(fwhm_nm_from_sigma(405.0, sigma), 0.53, max_relative = 1e-12);

        // intensity of the envelope at +-fwhm/2 is one half
        let half = fwhm_omega / 2.0;
        assert_relative_eq!((-(half / sigma).powi(2)).exp(), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn energy_conservation() {
        assert_relative_eq!(idler_for(405.0, 810.0), 810.0, max_relative = 1e-14);
        let li = idler_for(405.0, 794.0);
        assert_relative_eq!(1.0 / 794.0 + 1.0 / li, 1.0 / 405.0, max_relative = 1e-14);
    }
}
