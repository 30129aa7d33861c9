//! Observables extracted from simulated spectra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jsa::{JointSpectrum, MarginalSpectrum};

pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.05;
pub const DEFAULT_MIN_SEPARATION_NM: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub center_nm: f64,
    pub height: f64,
    pub fwhm_nm: f64,
    /// Half-open index range `[start, end)` owned by this peak; neighbouring
    /// windows meet at the intensity minimum between their peaks.
    pub window: (usize, usize),
    #[serde(skip)]
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakCatalog {
    pub peaks: Vec<Peak>,
    pub threshold_fraction: f64,
    pub min_separation_nm: f64,
}

impl PeakCatalog {
    pub fn len(&self) -> usize {
        self.peaks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.peaks.is_empty()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.center_nm).collect()
    }

    pub fn heights(&self) -> Vec<f64> {
        self.peaks.iter().map(|p| p.height).collect()
    }
}

fn interpolate_crossing(x: &[f64], y: &[f64], a: usize, b: usize, level: f64) -> f64 {
    let (ya, yb) = (y[a], y[b]);
    if yb == ya {
        return x[a];
    }
    x[a] + (level - ya) / (yb - ya) * (x[b] - x[a])
}

/// Full width at half maximum of the global maximum, with linear
/// interpolation of both half-maximum crossings.
pub fn fwhm(spectrum: &MarginalSpectrum) -> Result<f64> {
    let y = &spectrum.values;
    let x = &spectrum.wavelengths_nm;
    let (imax, &peak) = y
        .iter()
        .enumerate()
        .fold((0, &y[0]), |best, cur| if cur.1 > best.1 { cur } else { best });
    if !(peak > 0.0) {
        return Err(Error::invalid("spectrum", "no positive maximum"));
    }
    let half = 0.5 * peak;
    let mut a = imax;
    while a > 0 && y[a] > half {
        a -= 1;
    }
    let mut b = imax;
    while b + 1 < y.len() && y[b] > half {
        b += 1;
    }
    if y[a] > half || y[b] > half {
        return Err(Error::PeakTruncated);
    }
    let left = interpolate_crossing(x, y, a, a + 1, half);
    let right = interpolate_crossing(x, y, b - 1, b, half);
    Ok(right - left)
}

/// Local maxima (plateaus count once, at their lowest wavelength) at or
/// above `threshold_fraction` of the global maximum. Maxima closer than
/// `min_separation_nm` to a taller one are merged into it; equal heights
/// resolve toward the lower wavelength. Grid end points are never peaks.
pub fn find_peaks(spectrum: &MarginalSpectrum, threshold_fraction: f64, min_separation_nm: f64) -> PeakCatalog {
    let y = &spectrum.values;
    let x = &spectrum.wavelengths_nm;
    let n = y.len();
    let max = y.iter().cloned().fold(0.0, f64::max);
    let mut candidates = Vec::new();
    if max > 0.0 {
        let floor = threshold_fraction * max;
        let mut k = 1;
        while k + 1 < n {
            let mut end = k;
            while end + 1 < n && y[end + 1] == y[k] {
                end += 1;
            }
            if y[k] > y[k - 1] && end + 1 < n && y[end + 1] < y[k] && y[k] >= floor {
                candidates.push(k);
            }
            k = end + 1;
        }
    }
    candidates.sort_by(|&a, &b| y[b].total_cmp(&y[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for c in candidates {
        if kept.iter().all(|&k| (x[k] - x[c]).abs() >= min_separation_nm) {
            kept.push(c);
        }
    }
    kept.sort_unstable();

    let mut bounds = vec![0];
    for w in kept.windows(2) {
        let (a, b) = (w[0], w[1]);
        let split = (a + 1..b).fold(a + 1, |m, k| if y[k] < y[m] { k } else { m });
        bounds.push(split);
    }
    bounds.push(n);

    let peaks = kept
        .iter()
        .enumerate()
        .map(|(p, &k)| {
            let window = (bounds[p], bounds[p + 1]);
            Peak {
                center_nm: x[k],
                height: y[k],
                fwhm_nm: windowed_fwhm(x, y, k, window),
                window,
                index: k,
            }
        })
        .collect();
    PeakCatalog {
        peaks,
        threshold_fraction,
        min_separation_nm,
    }
}

/// Half-maximum width of the peak at `k`, with crossings clamped to the
/// peak's window when the profile does not fall to half inside it.
fn windowed_fwhm(x: &[f64], y: &[f64], k: usize, (start, end): (usize, usize)) -> f64 {
    let half = 0.5 * y[k];
    let mut a = k;
    while a > start && y[a] > half {
        a -= 1;
    }
    let left = if y[a] <= half && a < k {
        interpolate_crossing(x, y, a, a + 1, half)
    } else {
        x[a]
    };
    let mut b = k;
    while b + 1 < end && y[b] > half {
        b += 1;
    }
    let right = if y[b] <= half && b > k {
        interpolate_crossing(x, y, b - 1, b, half)
    } else {
        x[b]
    };
    right - left
}

/// Gaps between consecutive peak centers, nm.
pub fn peak_spacing(catalog: &PeakCatalog) -> Result<Vec<f64>> {
    if catalog.len() < 2 {
        return Err(Error::InsufficientPeaks(catalog.len()));
    }
    Ok(catalog.peaks.windows(2).map(|w| w[1].center_nm - w[0].center_nm).collect())
}

/// Fraction of the marginal's integral inside each peak window. The sum is
/// at most one; anything left belongs to regions outside every window.
pub fn mode_weights(spectrum: &MarginalSpectrum, catalog: &PeakCatalog) -> Vec<f64> {
    let total: f64 = spectrum.values.iter().sum();
    if !(total > 0.0) {
        return vec![0.0; catalog.len()];
    }
    catalog
        .peaks
        .iter()
        .map(|p| spectrum.values[p.window.0..p.window.1].iter().sum::<f64>() / total)
        .collect()
}

/// Coefficient of variation (population standard deviation over mean).
pub fn coefficient_of_variation(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return 0.0;
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Overlap of two frequency modes selected by signal-axis peak windows.
///
/// Restricting the joint intensity to signal window `i` and integrating
/// over the signal leaves the partner (idler) spectrum heralded by that
/// mode. The result is the normalized inner product of the two heralded
/// idler spectra: 0 when the modes are spectrally disjoint, 1 for
/// identical windows.
pub fn mode_overlap(spectrum: &JointSpectrum, catalog: &PeakCatalog, i: usize, j: usize) -> Result<f64> {
    let len = catalog.len();
    for index in [i, j] {
        if index >= len {
            return Err(Error::InvalidPeakIndex { index, len });
        }
    }
    let ns = spectrum.grid.signal.points;
    let ni = spectrum.grid.idler.points;
    let heralded = |p: &Peak| -> Result<Vec<f64>> {
        if p.window.1 > ns {
            return Err(Error::invalid("catalog", "peak window exceeds the signal axis"));
        }
        let mut q = vec![0.0; ni];
        for s in p.window.0..p.window.1 {
            for (v, x) in q.iter_mut().zip(&spectrum.intensity[s * ni..(s + 1) * ni]) {
                *v += x;
            }
        }
        Ok(q)
    };
    let a = heralded(&catalog.peaks[i])?;
    let b = heralded(&catalog.peaks[j])?;
    let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    if aa == 0.0 || bb == 0.0 {
        return Ok(0.0);
    }
    Ok((ab / (aa * bb).sqrt()).clamp(0.0, 1.0))
}

/// Largest overlap between any two distinct modes of a catalog.
pub fn max_pairwise_overlap(spectrum: &JointSpectrum, catalog: &PeakCatalog) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..catalog.len() {
        for j in i + 1..catalog.len() {
            worst = worst.max(mode_overlap(spectrum, catalog, i, j)?);
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtReport {
    /// Normalized Schmidt coefficients, descending.
    pub coefficients: Vec<f64>,
    pub schmidt_number: f64,
    /// Entanglement entropy in bits.
    pub entropy_bits: f64,
    /// Relative Frobenius error of the SVD reconstruction.
    pub reconstruction_error: f64,
}

/// Singular-value decomposition of the grid amplitude weighted by
/// `sqrt(dls dli)`.
pub fn schmidt_decompose(spectrum: &JointSpectrum) -> Result<SchmidtReport> {
    let amp = spectrum.amplitude.as_ref().ok_or(Error::AmplitudeUnavailable)?;
    let (ns, ni) = (spectrum.grid.signal.points, spectrum.grid.idler.points);
    let measure = spectrum.grid.cell().sqrt();
    let m = DMatrix::<Complex64>::from_row_iterator(ns, ni, amp.iter().map(|a| a * measure));
    let norm = m.norm();
    if !(norm > 0.0) {
        return Err(Error::invalid("spectrum", "zero amplitude"));
    }
    let svd = m.clone().svd(true, true);
    let rebuilt = svd
        .clone()
        .recompose()
        .map_err(|e| Error::invalid("spectrum", format!("SVD reconstruction failed: {e}")))?;
    let reconstruction_error = (&rebuilt - &m).norm() / norm;

    let mut sq: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
    sq.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = sq.iter().sum();
    let coefficients: Vec<f64> = sq.iter().map(|s| s / total).collect();
    let purity: f64 = coefficients.iter().map(|l| l * l).sum();
    let entropy_bits = -coefficients
        .iter()
        .filter(|l| **l > 0.0)
        .map(|l| l * l.log2())
        .sum::<f64>();
    Ok(SchmidtReport {
        coefficients,
        schmidt_number: 1.0 / purity,
        entropy_bits,
        reconstruction_error,
    })
}
