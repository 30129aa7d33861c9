//! PNG previews of joint spectra and marginals. Numeric exports are the
//! record of a run; these images are for looking at.

use std::path::Path;

use image::{Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::jsa::{JointSpectrum, MarginalSpectrum};

fn colormap(t: f64) -> Rgb<u8> {
    // black -> blue -> yellow -> white
    let t = t.clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.33 {
        let u = t / 0.33;
        (0.0, 0.0, u)
    } else if t < 0.66 {
        let u = (t - 0.33) / 0.33;
        (u, u, 1.0 - u)
    } else {
        let u = (t - 0.66) / 0.34;
        (1.0, 1.0, u)
    };
    Rgb([(r * 255.0).round() as u8, (g * 255.0).round() as u8, (b * 255.0).round() as u8])
}

/// Heatmap with the signal wavelength increasing upward and the idler
/// wavelength to the right.
pub fn jsi_image(spectrum: &JointSpectrum) -> RgbImage {
    let g = &spectrum.grid;
    let (ns, ni) = (g.signal.points, g.idler.points);
    let max = spectrum.intensity.iter().cloned().fold(0.0, f64::max);
    let scale = if max > 0.0 { 1.0 / max } else { 0.0 };
    RgbImage::from_fn(ni as u32, ns as u32, |x, y| {
        let s = ns - 1 - y as usize;
        colormap(spectrum.at(s, x as usize) * scale)
    })
}

pub fn marginal_image(m: &MarginalSpectrum, width: u32, height: u32) -> RgbImage {
    let mut img = RgbImage::from_pixel(width, height, Rgb([255, 255, 255]));
    let n = m.values.len();
    let max = m.max();
    if n < 2 || !(max > 0.0) {
        return img;
    }
    let mut prev: Option<(i64, i64)> = None;
    for x in 0..width {
        let k = (x as usize * (n - 1)) / (width as usize - 1).max(1);
        let v = m.values[k] / max;
        let y = ((1.0 - v) * (height - 1) as f64).round() as i64;
        let (x, y) = (x as i64, y);
        if let Some((_, py)) = prev {
            let (a, b) = if py < y { (py, y) } else { (y, py) };
            for yy in a..=b {
                img.put_pixel(x as u32, yy as u32, Rgb([20, 60, 200]));
            }
        } else {
            img.put_pixel(x as u32, y as u32, Rgb([20, 60, 200]));
        }
        prev = Some((x, y));
    }
    img
}

pub fn save_png(img: &RgbImage, path: &Path) -> Result<()> {
    img.save(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    })
}
