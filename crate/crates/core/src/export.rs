//! File formats for joint spectra and marginals.
//!
//! CSV matrix: the first row is `signal_nm\idler_nm` followed by the idler
//! wavelengths; every further row starts with a signal wavelength followed
//! by the intensities for that signal wavelength.
//!
//! Binary grid (little endian):
//!
//! | offset | type       | content                                   |
//! |--------|------------|-------------------------------------------|
//! | 0      | `[u8; 4]`  | magic `JSIG`                              |
//! | 4      | `u32`      | format version (1)                        |
//! | 8      | `u32`      | signal points `Ns`                        |
//! | 12     | `u32`      | idler points `Ni`                         |
//! | 16     | `f64` x 4  | signal min, signal max, idler min, idler max (nm) |
//! | 48     | `f64` x Ns*Ni | intensity, row-major, signal index first |

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::jsa::{Axis, JointSpectrum, MarginalSpectrum, SpectralGrid};

pub const BINARY_MAGIC: &[u8; 4] = b"JSIG";
pub const BINARY_VERSION: u32 = 1;
const HEADER_LEN: usize = 48;

pub fn jsi_to_csv(spectrum: &JointSpectrum) -> String {
    let g = &spectrum.grid;
    let mut out = String::with_capacity(g.len() * 24);
    out.push_str("signal_nm\\idler_nm");
    for l in g.idler.values() {
        write!(out, ",{l}").unwrap();
    }
    out.push('\n');
    for (s, l) in g.signal.values().into_iter().enumerate() {
        write!(out, "{l}").unwrap();
        for i in 0..g.idler.points {
            write!(out, ",{:e}", spectrum.at(s, i)).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn marginal_to_csv(m: &MarginalSpectrum) -> String {
    let peak = m.max();
    let mut out = String::from("wavelength_nm,density,normalized\n");
    for (l, v) in m.wavelengths_nm.iter().zip(&m.values) {
        let n = if peak > 0.0 { v / peak } else { 0.0 };
        writeln!(out, "{l},{v:e},{n:e}").unwrap();
    }
    out
}

pub fn jsi_to_binary(spectrum: &JointSpectrum) -> Vec<u8> {
    let g = &spectrum.grid;
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(BINARY_MAGIC);
    out.extend_from_slice(&BINARY_VERSION.to_le_bytes());
    out.extend_from_slice(&(g.signal.points as u32).to_le_bytes());
    out.extend_from_slice(&(g.idler.points as u32).to_le_bytes());
    for v in [g.signal.min_nm, g.signal.max_nm, g.idler.min_nm, g.idler.max_nm] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in &spectrum.intensity {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn jsi_from_binary(bytes: &[u8]) -> Result<JointSpectrum> {
    let bad = |reason: &str| Error::Parse {
        what: "binary grid".into(),
        reason: reason.into(),
    };
    if bytes.len() < HEADER_LEN || &bytes[0..4] != BINARY_MAGIC {
        return Err(bad("missing JSIG header"));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    if u32_at(4) != BINARY_VERSION {
        return Err(bad("unsupported version"));
    }
    let (ns, ni) = (u32_at(8) as usize, u32_at(12) as usize);
    if bytes.len() != HEADER_LEN + 8 * ns * ni {
        return Err(bad("length does not match dimensions"));
    }
    let grid = SpectralGrid {
        signal: Axis::new(f64_at(16), f64_at(24), ns),
        idler: Axis::new(f64_at(32), f64_at(40), ni),
    };
    let intensity = (0..ns * ni).map(|k| f64_at(HEADER_LEN + 8 * k)).collect();
    Ok(JointSpectrum::from_intensity(grid, intensity))
}
