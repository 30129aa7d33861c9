//! Collinear type-II (e -> o + e) phase matching.
//!
//! The pump and idler are extraordinary waves whose index depends on the
//! internal propagation angle `theta`; the signal is ordinary. All three
//! waves travel along the same internal direction.

use num_complex::Complex64;

use crate::crystal::{wavenumber, CrystalSpec};
use crate::error::{Error, Result};
use crate::roots::{brent, scan_brackets};
use crate::units::{idler_for, um_from_omega};

/// Angle scan step for bracketing phase-matching angles.
pub const ANGLE_SCAN_STEP_DEG: f64 = 0.05;
/// Wavelength scan step for bracketing central wavelengths.
pub const WAVELENGTH_SCAN_STEP_NM: f64 = 0.5;
/// Residual accepted for angle roots, rad/um.
pub const ANGLE_RESIDUAL_TOL: f64 = 1e-10;

/// Polarization roles of the three waves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    /// extraordinary pump, ordinary signal, extraordinary idler
    TypeIIeoe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatchConfig {
    pub crystal: CrystalSpec,
    pub polarization: Polarization,
    pub collinear: bool,
}

impl PhaseMatchConfig {
    pub fn type_ii(crystal: CrystalSpec) -> Self {
        PhaseMatchConfig {
            crystal,
            polarization: Polarization::TypeIIeoe,
            collinear: true,
        }
    }

    /// Mismatch `k_s + k_i - k_p` for wavelengths in um; the pump wavelength
    /// follows from energy conservation.
    pub fn delta_k_wavelengths(&self, signal_um: f64, idler_um: f64, theta: f64) -> Result<f64> {
        let pump_um = 1.0 / (1.0 / signal_um + 1.0 / idler_um);
        let c = &self.crystal;
        let ks = wavenumber(c.index_ordinary(signal_um)?, signal_um);
        let ki = wavenumber(c.index_extraordinary_at_angle(idler_um, theta)?, idler_um);
        let kp = wavenumber(c.index_extraordinary_at_angle(pump_um, theta)?, pump_um);
        Ok(ks + ki - kp)
    }
}

/// Wave-vector mismatch in rad/um for angular frequencies in rad/fs.
pub fn delta_k(cfg: &PhaseMatchConfig, omega_s: f64, omega_i: f64, theta: f64) -> Result<f64> {
    if !(omega_s > 0.0 && omega_i > 0.0) {
        return Err(Error::invalid("omega", "frequencies must be positive"));
    }
    cfg.delta_k_wavelengths(um_from_omega(omega_s), um_from_omega(omega_i), theta)
}

/// `sin(x)/x`, with the Taylor series near zero.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `sinc(dk L / 2) exp(i dk L / 2)` for a known mismatch and length in um.
#[inline]
pub fn phase_matching_from_mismatch(delta_k: f64, length_um: f64) -> Complex64 {
    let x = 0.5 * delta_k * length_um;
    let (s, c) = x.sin_cos();
    Complex64::new(c, s) * sinc(x)
}

pub fn phase_matching_function(cfg: &PhaseMatchConfig, omega_s: f64, omega_i: f64, theta: f64) -> Result<Complex64> {
    let dk = delta_k(cfg, omega_s, omega_i, theta)?;
    Ok(phase_matching_from_mismatch(dk, cfg.crystal.length_um()))
}

/// Internal angle (rad) at which degenerate down-conversion of `pump_nm`
/// into two photons at `2 pump_nm` is phase matched. When several roots
/// exist the one nearest the crystal cut angle is returned.
pub fn solve_degenerate_angle(cfg: &PhaseMatchConfig, pump_nm: f64) -> Result<f64> {
    let pump_um = pump_nm * 1e-3;
    let down_um = 2.0 * pump_um;
    let c = &cfg.crystal;
    c.ordinary.check_range(pump_um)?;
    c.extraordinary.check_range(pump_um)?;
    c.ordinary.check_range(down_um)?;
    c.extraordinary.check_range(down_um)?;

    let f = |theta: f64| cfg.delta_k_wavelengths(down_um, down_um, theta);
    let step = ANGLE_SCAN_STEP_DEG.to_radians();
    let brackets = scan_brackets(|t| f(t).ok(), step, 90f64.to_radians() - step, step);
    let target = c.cut_angle_deg.to_radians();
    let theta = brackets
        .into_iter()
        .filter_map(|(lo, hi)| brent(|t| f(t).unwrap_or(f64::NAN), lo, hi, 1e-13, 200))
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
        .ok_or_else(|| Error::NoPhaseMatch(format!("no degenerate angle for a {pump_nm} nm pump")))?;
    let residual = f(theta)?.abs();
    if residual >= ANGLE_RESIDUAL_TOL {
        return Err(Error::NoPhaseMatch(format!(
            "angle root did not converge (|dk| = {residual:e} rad/um)"
        )));
    }
    Ok(theta)
}

/// Signal and idler central wavelengths (nm) phase matched at internal
/// angle `theta` for a pump at `pump_nm`. The search covers signal
/// wavelengths in `[1.5, 2.5] x pump_nm`; the root nearest degeneracy wins.
pub fn central_wavelengths_at_angle(cfg: &PhaseMatchConfig, pump_nm: f64, theta: f64) -> Result<(f64, f64)> {
    let (lo_um, hi_um) = cfg.crystal.valid_range_um();
    let lo = (1.5 * pump_nm).max(lo_um * 1e3);
    let hi = (2.5 * pump_nm).min(hi_um * 1e3);
    if lo >= hi {
        return Err(Error::NoPhaseMatch(format!("empty search window for a {pump_nm} nm pump")));
    }
    let f = |signal_nm: f64| {
        let idler_nm = idler_for(pump_nm, signal_nm);
        if !(idler_nm > 0.0) {
            return Err(Error::NoPhaseMatch("idler wavelength not positive".into()));
        }
        cfg.delta_k_wavelengths(signal_nm * 1e-3, idler_nm * 1e-3, theta)
    };
    let degenerate = 2.0 * pump_nm;
    let signal = scan_brackets(|x| f(x).ok(), lo, hi, WAVELENGTH_SCAN_STEP_NM)
        .into_iter()
        .filter_map(|(a, b)| brent(|x| f(x).unwrap_or(f64::NAN), a, b, 1e-12, 200))
        .min_by(|a, b| (a - degenerate).abs().total_cmp(&(b - degenerate).abs()))
        .ok_or_else(|| {
            Error::NoPhaseMatch(format!(
                "no collinear solution at {:.4} deg for a {pump_nm} nm pump",
                theta.to_degrees()
            ))
        })?;
    Ok((signal, idler_for(pump_nm, signal)))
}
