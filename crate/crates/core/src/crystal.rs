//! Uniaxial crystal dispersion.
//!
//! Refractive indices come from a single-pole Sellmeier formula per ray,
//! loaded from a small TOML data file (see `data/bbo_kato1986.toml` for the
//! layout). The extraordinary index at a propagation angle `theta` from the
//! optic axis follows the index ellipsoid:
//!
//! ```text
//! 1 / n_e(theta)^2 = cos^2(theta) / n_o^2 + sin^2(theta) / n_e^2
//! ```

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUILTIN_BBO: &str = include_str!("../data/bbo_kato1986.toml");

/// Name of the built-in beta barium borate dispersion set.
pub const BUILTIN_BBO_NAME: &str = "bbo-kato-1986";

/// Coefficients of `n^2 = a + b / (l^2 - c) - d l^2` with `l` in um.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SellmeierSet {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub lambda_min_um: f64,
    pub lambda_max_um: f64,
}

impl SellmeierSet {
    /// `n^2` without range checking.
    #[inline]
    pub fn n_squared_unchecked(&self, lambda_um: f64) -> f64 {
        let l2 = lambda_um * lambda_um;
        self.a + self.b / (l2 - self.c) - self.d * l2
    }

    pub fn check_range(&self, lambda_um: f64) -> Result<()> {
        if lambda_um.is_finite() && lambda_um >= self.lambda_min_um && lambda_um <= self.lambda_max_um {
            Ok(())
        } else {
            Err(Error::WavelengthOutOfRange {
                wavelength_um: lambda_um,
                min_um: self.lambda_min_um,
                max_um: self.lambda_max_um,
            })
        }
    }

    pub fn index(&self, lambda_um: f64) -> Result<f64> {
        self.check_range(lambda_um)?;
        Ok(self.n_squared_unchecked(lambda_um).sqrt())
    }

    /// Checks the coefficient set itself: a sane range, no pole inside it,
    /// and `n^2 > 1` everywhere on it (sampled densely).
    pub fn validate(&self, field: &str) -> Result<()> {
        let lo = self.lambda_min_um;
        let hi = self.lambda_max_um;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
            return Err(Error::invalid(field, format!("bad validity range [{lo}, {hi}] um")));
        }
        if self.c >= 0.0 && self.c.sqrt() >= lo && self.c.sqrt() <= hi {
            return Err(Error::invalid(field, "Sellmeier pole inside the validity range"));
        }
        const SAMPLES: usize = 2000;
        for k in 0..=SAMPLES {
            let l = lo + (hi - lo) * k as f64 / SAMPLES as f64;
            let n2 = self.n_squared_unchecked(l);
            if !(n2 > 1.0) {
                return Err(Error::invalid(field, format!("n^2 = {n2} <= 1 at {l} um")));
            }
        }
        Ok(())
    }
}

/// A dispersion data file: one record per ray.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SellmeierData {
    pub name: String,
    #[serde(default)]
    pub version: u32,
    #[serde(default)]
    pub material: String,
    pub ordinary: SellmeierSet,
    pub extraordinary: SellmeierSet,
}

impl SellmeierData {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let data: SellmeierData = toml::from_str(text).map_err(|e| Error::Parse {
            what: "Sellmeier data".into(),
            reason: e.to_string(),
        })?;
        data.ordinary.validate("ordinary")?;
        data.extraordinary.validate("extraordinary")?;
        Ok(data)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn builtin_bbo() -> Self {
        let data = Self::from_toml_str(BUILTIN_BBO).expect("built-in BBO data parses");
        data.assert_negative_uniaxial()
            .expect("built-in BBO data is negative uniaxial");
        data
    }

    /// Verifies `n_e < n_o` over the shared validity range, which catches
    /// files with the two rays transposed.
    pub fn assert_negative_uniaxial(&self) -> Result<()> {
        let lo = self.ordinary.lambda_min_um.max(self.extraordinary.lambda_min_um);
        let hi = self.ordinary.lambda_max_um.min(self.extraordinary.lambda_max_um);
        for k in 0..=200 {
            let l = lo + (hi - lo) * k as f64 / 200.0;
            if self.extraordinary.n_squared_unchecked(l) >= self.ordinary.n_squared_unchecked(l) {
                return Err(Error::invalid(
                    "extraordinary",
                    format!("n_e >= n_o at {l} um; expected a negative uniaxial crystal"),
                ));
            }
        }
        Ok(())
    }
}

/// Geometry and dispersion of a uniaxial crystal.
#[derive(Debug, Clone, PartialEq)]
pub struct CrystalSpec {
    pub name: String,
    pub length_mm: f64,
    pub cut_angle_deg: f64,
    pub azimuth_deg: f64,
    pub ordinary: SellmeierSet,
    pub extraordinary: SellmeierSet,
}

impl CrystalSpec {
    pub fn new(data: SellmeierData, length_mm: f64, cut_angle_deg: f64, azimuth_deg: f64) -> Result<Self> {
        if !(length_mm.is_finite() && length_mm > 0.0) {
            return Err(Error::invalid("crystal.length_mm", "must be > 0"));
        }
        if !(cut_angle_deg > 0.0 && cut_angle_deg < 90.0) {
            return Err(Error::invalid("crystal.cut_angle_deg", "must lie strictly inside (0, 90) degrees"));
        }
        Ok(CrystalSpec {
            name: data.name,
            length_mm,
            cut_angle_deg,
            azimuth_deg,
            ordinary: data.ordinary,
            extraordinary: data.extraordinary,
        })
    }

    /// 5 mm BBO cut at 41.9 degrees for type-II down-conversion near 810 nm.
    pub fn bbo() -> Self {
        Self::new(SellmeierData::builtin_bbo(), 5.0, 41.9, 0.0).expect("valid built-in crystal")
    }

    pub fn length_um(&self) -> f64 {
        self.length_mm * 1e3
    }

    /// Smallest wavelength interval on which both rays are valid.
    pub fn valid_range_um(&self) -> (f64, f64) {
        (
            self.ordinary.lambda_min_um.max(self.extraordinary.lambda_min_um),
            self.ordinary.lambda_max_um.min(self.extraordinary.lambda_max_um),
        )
    }

    pub fn index_ordinary(&self, lambda_um: f64) -> Result<f64> {
        self.ordinary.index(lambda_um)
    }

    pub fn index_extraordinary_principal(&self, lambda_um: f64) -> Result<f64> {
        self.extraordinary.index(lambda_um)
    }

    pub fn index_extraordinary_at_angle(&self, lambda_um: f64, theta_rad: f64) -> Result<f64> {
        if !(0.0..=FRAC_PI_2).contains(&theta_rad) {
            return Err(Error::AngleOutOfRange { angle_rad: theta_rad });
        }
        self.ordinary.check_range(lambda_um)?;
        self.extraordinary.check_range(lambda_um)?;
        let inv_o2 = 1.0 / self.ordinary.n_squared_unchecked(lambda_um);
        let inv_e2 = 1.0 / self.extraordinary.n_squared_unchecked(lambda_um);
        Ok(extraordinary_from_inverse_squares(inv_o2, inv_e2, theta_rad.cos().powi(2)))
    }
}

/// Index ellipsoid with precomputed `1/n_o^2`, `1/n_e^2` and `cos^2(theta)`.
#[inline]
pub(crate) fn extraordinary_from_inverse_squares(inv_o2: f64, inv_e2: f64, cos2: f64) -> f64 {
    1.0 / (cos2 * inv_o2 + (1.0 - cos2) * inv_e2).sqrt()
}

/// Wave number `k = 2 pi n / lambda` in rad/um.
#[inline]
pub fn wavenumber(n: f64, lambda_um: f64) -> f64 {
    2.0 * PI * n / lambda_um
}
