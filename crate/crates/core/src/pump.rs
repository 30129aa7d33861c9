//! Pump beam, slit masks and the paraxial position -> angle map.
//!
//! Behind the mask the pump is focused by a lens of focal length `f`. A ray
//! at vertical offset `y` leaves the lens tilted by `arctan(y / f)`, which
//! refraction at the crystal face reduces to `arctan(y / f) / n_pump`. Only
//! the vertical coordinate matters, so a mask is a 1-D row of bins.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::crystal::CrystalSpec;
use crate::error::{Error, Result};
use crate::units::sigma_from_fwhm_nm;

/// Default 1/e^2 intensity radius of the pump at the mask.
pub const DEFAULT_BEAM_RADIUS_MM: f64 = 0.7;
/// Default mask aperture: the full `+-2 w` extent of the default beam.
pub const DEFAULT_APERTURE_MM: f64 = 4.0 * DEFAULT_BEAM_RADIUS_MM;
pub const DEFAULT_FOCAL_LENGTH_MM: f64 = 50.0;
pub const DEFAULT_PUMP_NM: f64 = 405.0;
pub const DEFAULT_PUMP_FWHM_NM: f64 = 0.53;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Gaussian,
    FlatTop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpSpec {
    pub center_nm: f64,
    /// Amplitude width of the spectral envelope, rad/fs.
    pub sigma: f64,
    pub profile: ProfileKind,
    /// 1/e^2 intensity radius, mm.
    pub beam_radius_mm: f64,
    pub focal_length_mm: f64,
    /// Internal angle of the on-axis ray to the optic axis.
    pub center_angle_deg: f64,
}

impl PumpSpec {
    /// Builds a pump from a spectral intensity FWHM in nm.
    pub fn from_fwhm(
        center_nm: f64,
        fwhm_nm: f64,
        profile: ProfileKind,
        beam_radius_mm: f64,
        focal_length_mm: f64,
        center_angle_deg: f64,
    ) -> Result<Self> {
        if !(fwhm_nm > 0.0) {
            return Err(Error::invalid("pump.bandwidth_fwhm_nm", "must be > 0"));
        }
        let pump = PumpSpec {
            center_nm,
            sigma: sigma_from_fwhm_nm(center_nm, fwhm_nm),
            profile,
            beam_radius_mm,
            focal_length_mm,
            center_angle_deg,
        };
        pump.validate()?;
        Ok(pump)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("pump.center_nm", self.center_nm),
            ("pump.sigma", self.sigma),
            ("pump.beam_radius_mm", self.beam_radius_mm),
            ("pump.focal_length_mm", self.focal_length_mm),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(field, "must be finite and > 0"));
            }
        }
        if !(self.center_angle_deg > 0.0 && self.center_angle_deg < 90.0) {
            return Err(Error::invalid("pump.center_angle_deg", "must lie inside (0, 90) degrees"));
        }
        Ok(())
    }

    pub fn omega_p(&self) -> f64 {
        crate::units::omega_from_nm(self.center_nm)
    }

    /// Relative intensity at vertical offset `y_mm`.
    pub fn intensity(&self, y_mm: f64) -> f64 {
        match self.profile {
            ProfileKind::Gaussian => (-2.0 * y_mm * y_mm / (self.beam_radius_mm * self.beam_radius_mm)).exp(),
            ProfileKind::FlatTop => 1.0,
        }
    }
}

/// Binned transmission pattern over the beam's vertical cross-section.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSpec {
    pub transmission: Vec<f64>,
    pub aperture_mm: f64,
}

impl MaskSpec {
    pub fn open(bins: usize) -> Result<Self> {
        Self::new(vec![1.0; bins], DEFAULT_APERTURE_MM)
    }

    pub fn new(transmission: Vec<f64>, aperture_mm: f64) -> Result<Self> {
        if transmission.is_empty() {
            return Err(Error::invalid("mask.bins", "need at least one bin"));
        }
        if let Some(t) = transmission.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(Error::invalid("mask.transmission", format!("{t} outside [0, 1]")));
        }
        if !(aperture_mm.is_finite() && aperture_mm > 0.0) {
            return Err(Error::invalid("mask.aperture_mm", "must be > 0"));
        }
        Ok(MaskSpec {
            transmission,
            aperture_mm,
        })
    }

    pub fn with_aperture(mut self, aperture_mm: f64) -> Result<Self> {
        if !(aperture_mm.is_finite() && aperture_mm > 0.0) {
            return Err(Error::invalid("mask.aperture_mm", "must be > 0"));
        }
        self.aperture_mm = aperture_mm;
        Ok(self)
    }

    pub fn bins(&self) -> usize {
        self.transmission.len()
    }

    /// Vertical offset (mm) of the center of bin `j` (0-based). Computed from
    /// the integer `2j + 1 - N` so mirrored bins get exactly opposite offsets.
    pub fn bin_center_mm(&self, j: usize) -> f64 {
        let n = self.bins() as f64;
        (2.0 * j as f64 + 1.0 - n) * (self.aperture_mm / (2.0 * n))
    }

    pub fn blocked_bins(&self) -> usize {
        self.transmission.iter().filter(|t| **t == 0.0).count()
    }

    pub fn is_fully_blocked(&self) -> bool {
        self.transmission.iter().all(|t| *t == 0.0)
    }

    /// Mirror image across the beam axis.
    pub fn reflected(&self) -> MaskSpec {
        let mut t = self.transmission.clone();
        t.reverse();
        MaskSpec {
            transmission: t,
            aperture_mm: self.aperture_mm,
        }
    }

    /// Maximal runs of blocked bins as 1-based `(start, width)`.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        runs(&self.transmission, |t| t == 0.0)
    }

    /// Maximal runs of transmitting bins as 1-based `(start, width)`.
    pub fn open_windows(&self) -> Vec<(usize, usize)> {
        runs(&self.transmission, |t| t > 0.0)
    }

    /// Compact text form, e.g. `11110000111` (`1` open, `0` blocked, `.` partial).
    pub fn pattern_string(&self) -> String {
        self.transmission
            .iter()
            .map(|t| match *t {
                1.0 => '1',
                0.0 => '0',
                _ => '.',
            })
            .collect()
    }

    /// Blocked runs expressed as physical `(center_mm, width_mm)` lines.
    pub fn physical_blocks(&self) -> Vec<(f64, f64)> {
        let bin = self.aperture_mm / self.bins() as f64;
        self.blocks()
            .into_iter()
            .map(|(start, width)| {
                let lo = -0.5 * self.aperture_mm + (start - 1) as f64 * bin;
                (lo + 0.5 * width as f64 * bin, width as f64 * bin)
            })
            .collect()
    }
}

fn runs(t: &[f64], pred: impl Fn(f64) -> bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = None;
    for (j, &v) in t.iter().enumerate() {
        match (pred(v), start) {
            (true, None) => start = Some(j),
            (false, Some(s)) => {
                out.push((s + 1, j - s));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s + 1, t.len() - s));
    }
    out
}

/// Mask with the given blocked runs. Starts are 1-based; overlapping runs
/// merge. Zero-width runs are ignored.
pub fn mask_from_slits(bins: usize, blocks: &[(usize, usize)]) -> Result<MaskSpec> {
    let mut mask = MaskSpec::open(bins)?;
    for &(start, width) in blocks {
        if width == 0 {
            continue;
        }
        if start == 0 || start + width - 1 > bins {
            return Err(Error::MaskBounds { start, width, bins });
        }
        for t in &mut mask.transmission[start - 1..start - 1 + width] {
            *t = 0.0;
        }
    }
    Ok(mask)
}

/// A single blocked run of `width` bins centered on 1-based bin `center`.
/// Even widths extend one bin further toward lower indices.
pub fn centered_slit(bins: usize, center: usize, width: usize) -> Result<MaskSpec> {
    if width == 0 {
        return MaskSpec::open(bins);
    }
    let start = (center + (width - 1) / 2)
        .checked_sub(width - 1)
        .filter(|s| *s >= 1)
        .ok_or(Error::MaskBounds { start: 0, width, bins })?;
    mask_from_slits(bins, &[(start, width)])
}

/// Which kind of run an alternating width pattern starts with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Leading {
    Block,
    Open,
}

/// Parses a dash-separated width list such as `4-1-4-1-4`.
pub fn parse_widths(pattern: &str) -> Result<Vec<usize>> {
    pattern
        .split('-')
        .map(|s| {
            s.trim().parse::<usize>().map_err(|e| Error::Parse {
                what: format!("width pattern `{pattern}`"),
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Alternating block/open runs of the given widths, centered in `bins`.
/// With a leading block, bins outside the pattern stay open; with a leading
/// open run they are blocked. When the spare bins are odd the extra one
/// goes after the pattern.
pub fn mask_from_pattern(bins: usize, widths: &[usize], leading: Leading) -> Result<MaskSpec> {
    let total: usize = widths.iter().sum();
    if total > bins {
        return Err(Error::invalid(
            "mask.pattern",
            format!("pattern covers {total} bins but the mask has {bins}"),
        ));
    }
    let outside = match leading {
        Leading::Block => 1.0,
        Leading::Open => 0.0,
    };
    let mut t = vec![outside; bins];
    let mut pos = (bins - total) / 2;
    let mut blocked = leading == Leading::Block;
    for &w in widths {
        for v in &mut t[pos..pos + w] {
            *v = if blocked { 0.0 } else { 1.0 };
        }
        pos += w;
        blocked = !blocked;
    }
    MaskSpec::new(t, DEFAULT_APERTURE_MM)
}

/// Rasterizes physical block lines `(center_mm, width_mm)` onto `bins` bins
/// spanning `aperture_mm`. A bin is blocked when its center lies strictly
/// inside a line.
pub fn mask_from_physical(blocks_mm: &[(f64, f64)], aperture_mm: f64, bins: usize) -> Result<MaskSpec> {
    let mut mask = MaskSpec::new(vec![1.0; bins.max(1)], aperture_mm)?;
    if bins == 0 {
        return Err(Error::invalid("mask.bins", "need at least one bin"));
    }
    for &(center, width) in blocks_mm {
        if !(width.is_finite() && width >= 0.0 && center.is_finite()) {
            return Err(Error::invalid("mask.blocks_mm", "center and width must be finite, width >= 0"));
        }
    }
    for j in 0..bins {
        let y = mask.bin_center_mm(j);
        if blocks_mm.iter().any(|&(c, w)| (y - c).abs() < 0.5 * w) {
            mask.transmission[j] = 0.0;
        }
    }
    Ok(mask)
}

/// One angular component of the pump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleBin {
    /// 0-based bin index.
    pub index: usize,
    /// Internal angle to the optic axis, rad.
    pub theta: f64,
    pub weight: Complex64,
}

/// Field amplitude `sqrt(I(y_j)) t_j` per bin, before normalization.
pub fn bin_amplitudes(pump: &PumpSpec, mask: &MaskSpec) -> Vec<f64> {
    (0..mask.bins())
        .map(|j| pump.intensity(mask.bin_center_mm(j)).sqrt() * mask.transmission[j])
        .collect()
}

/// Internal angle of bin `j`.
pub fn bin_angle(pump: &PumpSpec, mask: &MaskSpec, n_pump: f64, j: usize) -> f64 {
    let tilt_ext = (mask.bin_center_mm(j) / pump.focal_length_mm).atan();
    pump.center_angle_deg.to_radians() + tilt_ext / n_pump
}

/// Pump index seen by the on-axis ray.
pub fn pump_index(pump: &PumpSpec, crystal: &CrystalSpec) -> Result<f64> {
    crystal.index_extraordinary_at_angle(pump.center_nm * 1e-3, pump.center_angle_deg.to_radians())
}

/// Angle and normalized weight of every mask bin, blocked bins included
/// (with zero weight). `sum |c_j|^2 = 1`.
pub fn bin_angles(pump: &PumpSpec, mask: &MaskSpec, crystal: &CrystalSpec) -> Result<Vec<AngleBin>> {
    pump.validate()?;
    if mask.is_fully_blocked() {
        return Err(Error::FullyBlocked);
    }
    let n_pump = pump_index(pump, crystal)?;
    let amps = bin_amplitudes(pump, mask);
    let power: f64 = amps.iter().map(|a| a * a).sum();
    if !(power > 0.0) {
        return Err(Error::FullyBlocked);
    }
    let norm = power.sqrt();
    Ok(amps
        .iter()
        .enumerate()
        .map(|(j, a)| AngleBin {
            index: j,
            theta: bin_angle(pump, mask, n_pump, j),
            weight: Complex64::new(a / norm, 0.0),
        })
        .collect())
}

/// Bins at explicitly chosen internal angles (degrees) with equal weights.
pub fn explicit_bins(angles_deg: &[f64]) -> Result<Vec<AngleBin>> {
    if angles_deg.is_empty() {
        return Err(Error::FullyBlocked);
    }
    let w = 1.0 / (angles_deg.len() as f64).sqrt();
    angles_deg
        .iter()
        .enumerate()
        .map(|(index, &a)| {
            if !(a > 0.0 && a < 90.0) {
                return Err(Error::invalid("mask.angles_deg", format!("{a} outside (0, 90)")));
            }
            Ok(AngleBin {
                index,
                theta: a.to_radians(),
                weight: Complex64::new(w, 0.0),
            })
        })
        .collect()
}
