//! Joint spectral amplitude and intensity on a wavelength grid.
//!
//! For one internal pump angle the amplitude is the product of the pump
//! envelope (a Gaussian in the sum frequency) and the phase-matching
//! function. A shaped pump contributes one such term per angle bin; the
//! terms add either as amplitudes (coherent) or as intensities
//! (incoherent).
//!
//! Grid evaluation runs in parallel over signal rows. Each grid point sums
//! its bins in fixed bin order, so results do not depend on scheduling.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crystal::extraordinary_from_inverse_squares;
use crate::error::{Error, Result};
use crate::phase_matching::{phase_matching_from_mismatch, PhaseMatchConfig};
use crate::pump::{AngleBin, PumpSpec};
use crate::units::omega_from_nm;

pub const DEFAULT_GRID_POINTS: usize = 512;
pub const DEFAULT_GRID_MIN_NM: f64 = 770.0;
pub const DEFAULT_GRID_MAX_NM: f64 = 850.0;

/// Uniform wavelength axis, nm, ascending.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min_nm: f64,
    pub max_nm: f64,
    pub points: usize,
}

impl Axis {
    pub fn new(min_nm: f64, max_nm: f64, points: usize) -> Self {
        Axis { min_nm, max_nm, points }
    }

    pub fn step(&self) -> f64 {
        (self.max_nm - self.min_nm) / (self.points - 1) as f64
    }

    pub fn value(&self, k: usize) -> f64 {
        self.min_nm + (self.max_nm - self.min_nm) * k as f64 / (self.points - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.value(k)).collect()
    }

    fn validate(&self, field: &str) -> Result<()> {
        if self.points < 2 {
            return Err(Error::invalid(field, "need at least 2 points"));
        }
        if !(self.min_nm.is_finite() && self.max_nm.is_finite() && self.min_nm > 0.0 && self.min_nm < self.max_nm) {
            return Err(Error::invalid(field, format!("bounds {} .. {} nm must satisfy 0 < min < max", self.min_nm, self.max_nm)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub signal: Axis,
    pub idler: Axis,
}

impl Default for SpectralGrid {
    fn default() -> Self {
        Self::square(DEFAULT_GRID_MIN_NM, DEFAULT_GRID_MAX_NM, DEFAULT_GRID_POINTS)
    }
}

impl SpectralGrid {
    pub fn square(min_nm: f64, max_nm: f64, points: usize) -> Self {
        let a = Axis::new(min_nm, max_nm, points);
        SpectralGrid { signal: a, idler: a }
    }

    pub fn validate(&self) -> Result<()> {
        self.signal.validate("grid.signal")?;
        self.idler.validate("grid.idler")
    }

    /// Grid cell area, nm^2.
    pub fn cell(&self) -> f64 {
        self.signal.step() * self.idler.step()
    }

    pub fn len(&self) -> usize {
        self.signal.points * self.idler.points
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_dispersion_range(&self, cfg: &PhaseMatchConfig) -> Result<()> {
        let c = &cfg.crystal;
        let (s0, s1) = (self.signal.min_nm * 1e-3, self.signal.max_nm * 1e-3);
        let (i0, i1) = (self.idler.min_nm * 1e-3, self.idler.max_nm * 1e-3);
        let p0 = 1.0 / (1.0 / s0 + 1.0 / i0);
        let p1 = 1.0 / (1.0 / s1 + 1.0 / i1);
        for l in [s0, s1, i0, i1, p0, p1] {
            c.ordinary.check_range(l)?;
            c.extraordinary.check_range(l)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuperpositionMode {
    #[default]
    Coherent,
    Incoherent,
}

/// Amplitude (when available) and intensity on a grid, row-major with the
/// signal index first.
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpectrum {
    pub grid: SpectralGrid,
    pub amplitude: Option<Vec<Complex64>>,
    pub intensity: Vec<f64>,
    pub normalized: bool,
}

impl JointSpectrum {
    pub fn from_amplitude(grid: SpectralGrid, amplitude: Vec<Complex64>) -> Self {
        let intensity = amplitude.iter().map(|a| a.norm_sqr()).collect();
        JointSpectrum {
            grid,
            amplitude: Some(amplitude),
            intensity,
            normalized: false,
        }
    }

    pub fn from_intensity(grid: SpectralGrid, intensity: Vec<f64>) -> Self {
        JointSpectrum {
            grid,
            amplitude: None,
            intensity,
            normalized: false,
        }
    }

    #[inline]
    pub fn at(&self, s: usize, i: usize) -> f64 {
        self.intensity[s * self.grid.idler.points + i]
    }

    /// `sum |f|^2 dls dli`, summed row by row in index order.
    pub fn total_integral(&self) -> f64 {
        self.intensity.iter().sum::<f64>() * self.grid.cell()
    }

    /// Scales to unit integral. A zero spectrum is left untouched.
    pub fn normalize(&mut self) {
        let total = self.total_integral();
        if total > 0.0 && total.is_finite() {
            let inv = 1.0 / total;
            for v in &mut self.intensity {
                *v *= inv;
            }
            if let Some(a) = &mut self.amplitude {
                let s = inv.sqrt();
                for v in a.iter_mut() {
                    *v *= s;
                }
                // keep |a|^2 and the intensity bit-consistent
                for (v, a) in self.intensity.iter_mut().zip(a.iter()) {
                    *v = a.norm_sqr();
                }
            }
        }
        self.normalized = true;
    }

    /// Grid location of the largest intensity, as (signal nm, idler nm).
    pub fn argmax_nm(&self) -> (f64, f64) {
        let mut best = 0;
        for (k, v) in self.intensity.iter().enumerate() {
            if *v > self.intensity[best] {
                best = k;
            }
        }
        let n = self.grid.idler.points;
        (self.grid.signal.value(best / n), self.grid.idler.value(best % n))
    }
}

/// Pump envelope `exp(-((ws + wi - wp) / sigma)^2 / 2)`.
#[inline]
pub fn pump_envelope(pump: &PumpSpec, omega_s: f64, omega_i: f64) -> f64 {
    let x = (omega_s + omega_i - pump.omega_p()) / pump.sigma;
    (-0.5 * x * x).exp()
}

struct ActiveBin {
    weight: Complex64,
    cos2: f64,
}

fn evaluate(
    cfg: &PhaseMatchConfig,
    pump: &PumpSpec,
    grid: &SpectralGrid,
    bins: &[ActiveBin],
    mode: SuperpositionMode,
) -> Result<JointSpectrum> {
    pump.validate()?;
    grid.validate()?;
    grid.check_dispersion_range(cfg)?;
    let crystal = &cfg.crystal;
    let length = crystal.length_um();
    let omega_p = pump.omega_p();
    let sigma = pump.sigma;

    let signal_nm = grid.signal.values();
    let idler_nm = grid.idler.values();
    // theta-independent per-axis quantities
    let k_signal: Vec<f64> = signal_nm
        .iter()
        .map(|l| {
            let um = l * 1e-3;
            2.0 * PI * crystal.ordinary.n_squared_unchecked(um).sqrt() / um
        })
        .collect();
    let omega_s: Vec<f64> = signal_nm.iter().map(|l| omega_from_nm(*l)).collect();
    let omega_i: Vec<f64> = idler_nm.iter().map(|l| omega_from_nm(*l)).collect();
    let idler_inv: Vec<(f64, f64)> = idler_nm
        .iter()
        .map(|l| {
            let um = l * 1e-3;
            (
                1.0 / crystal.ordinary.n_squared_unchecked(um),
                1.0 / crystal.extraordinary.n_squared_unchecked(um),
            )
        })
        .collect();

    let ni = grid.idler.points;
    let coherent = mode == SuperpositionMode::Coherent;
    let mut amplitude = vec![Complex64::new(0.0, 0.0); if coherent { grid.len() } else { 0 }];
    let mut intensity = vec![0.0; grid.len()];

    let row = |s: usize, amp_row: &mut [Complex64], int_row: &mut [f64]| {
        let ls = signal_nm[s] * 1e-3;
        for i in 0..ni {
            let li = idler_nm[i] * 1e-3;
            let lp = 1.0 / (1.0 / ls + 1.0 / li);
            let x = (omega_s[s] + omega_i[i] - omega_p) / sigma;
            let alpha = (-0.5 * x * x).exp();
            let (io_i, ie_i) = idler_inv[i];
            let io_p = 1.0 / crystal.ordinary.n_squared_unchecked(lp);
            let ie_p = 1.0 / crystal.extraordinary.n_squared_unchecked(lp);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut acc_int = 0.0;
            for b in bins {
                let n_i = extraordinary_from_inverse_squares(io_i, ie_i, b.cos2);
                let n_p = extraordinary_from_inverse_squares(io_p, ie_p, b.cos2);
                let dk = k_signal[s] + 2.0 * PI * n_i / li - 2.0 * PI * n_p / lp;
                let f = phase_matching_from_mismatch(dk, length) * alpha;
                if coherent {
                    acc += b.weight * f;
                } else {
                    acc_int += b.weight.norm_sqr() * f.norm_sqr();
                }
            }
            if coherent {
                amp_row[i] = acc;
                int_row[i] = acc.norm_sqr();
            } else {
                int_row[i] = acc_int;
            }
        }
    };

    if coherent {
        amplitude
            .par_chunks_mut(ni)
            .zip(intensity.par_chunks_mut(ni))
            .enumerate()
            .for_each(|(s, (a, v))| row(s, a, v));
        Ok(JointSpectrum {
            grid: *grid,
            amplitude: Some(amplitude),
            intensity,
            normalized: false,
        })
    } else {
        intensity
            .par_chunks_mut(ni)
            .enumerate()
            .for_each(|(s, v)| row(s, &mut [], v));
        Ok(JointSpectrum::from_intensity(*grid, intensity))
    }
}

fn active_bins(bins: &[AngleBin]) -> Result<Vec<ActiveBin>> {
    let out: Vec<ActiveBin> = bins
        .iter()
        .filter(|b| b.weight != Complex64::new(0.0, 0.0))
        .map(|b| {
            if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&b.theta) {
                return Err(Error::AngleOutOfRange { angle_rad: b.theta });
            }
            Ok(ActiveBin {
                weight: b.weight,
                cos2: b.theta.cos().powi(2),
            })
        })
        .collect::<Result<_>>()?;
    if out.is_empty() {
        return Err(Error::FullyBlocked);
    }
    Ok(out)
}

/// Unnormalized amplitude for a single internal angle `theta` (rad).
pub fn single_angle_jsa(cfg: &PhaseMatchConfig, pump: &PumpSpec, grid: &SpectralGrid, theta: f64) -> Result<JointSpectrum> {
    let bins = active_bins(&[AngleBin {
        index: 0,
        theta,
        weight: Complex64::new(1.0, 0.0),
    }])?;
    evaluate(cfg, pump, grid, &bins, SuperpositionMode::Coherent)
}

/// Superposes the bins' spectra and normalizes the result to unit integral.
/// Coherent mode keeps the summed amplitude; incoherent mode keeps only the
/// intensity.
pub fn superposed_jsi(
    cfg: &PhaseMatchConfig,
    pump: &PumpSpec,
    grid: &SpectralGrid,
    bins: &[AngleBin],
    mode: SuperpositionMode,
) -> Result<JointSpectrum> {
    let active = active_bins(bins)?;
    let mut spectrum = evaluate(cfg, pump, grid, &active, mode)?;
    let total = spectrum.total_integral();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::NoPhaseMatch(format!("spectrum integrates to {total} on the grid")));
    }
    spectrum.normalize();
    Ok(spectrum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralAxis {
    Signal,
    Idler,
}

/// One-photon spectrum obtained by integrating the joint intensity over
/// the partner photon's wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSpectrum {
    pub axis: SpectralAxis,
    pub wavelengths_nm: Vec<f64>,
    /// Density per nm; integrates to the joint spectrum's total.
    pub values: Vec<f64>,
}

impl MarginalSpectrum {
    pub fn new(axis: SpectralAxis, wavelengths_nm: Vec<f64>, values: Vec<f64>) -> Self {
        MarginalSpectrum {
            axis,
            wavelengths_nm,
            values,
        }
    }

    pub fn step(&self) -> f64 {
        let n = self.wavelengths_nm.len();
        (self.wavelengths_nm[n - 1] - self.wavelengths_nm[0]) / (n - 1) as f64
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.step()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// Copy scaled to unit maximum, for plotting.
    pub fn normalized_to_max(&self) -> MarginalSpectrum {
        let m = self.max();
        let scale = if m > 0.0 { 1.0 / m } else { 1.0 };
        MarginalSpectrum {
            axis: self.axis,
            wavelengths_nm: self.wavelengths_nm.clone(),
            values: self.values.iter().map(|v| v * scale).collect(),
        }
    }
}

pub fn marginal(spectrum: &JointSpectrum, axis: SpectralAxis) -> MarginalSpectrum {
    let g = &spectrum.grid;
    let (ns, ni) = (g.signal.points, g.idler.points);
    match axis {
        SpectralAxis::Signal => {
            let d = g.idler.step();
            let values = (0..ns)
                .map(|s| spectrum.intensity[s * ni..(s + 1) * ni].iter().sum::<f64>() * d)
                .collect();
            MarginalSpectrum::new(axis, g.signal.values(), values)
        }
        SpectralAxis::Idler => {
            let d = g.signal.step();
            let mut values = vec![0.0; ni];
            for s in 0..ns {
                for (v, x) in values.iter_mut().zip(&spectrum.intensity[s * ni..(s + 1) * ni]) {
                    *v += x;
                }
            }
            for v in &mut values {
                *v *= d;
            }
            MarginalSpectrum::new(axis, g.idler.values(), values)
        }
    }
}
