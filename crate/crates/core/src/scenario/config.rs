//! Scenario files (TOML).
//!
//! ```toml
//! name = "fig2-a3"
//! mode = "incoherent"
//!
//! [crystal]
//! sellmeier = "bbo-kato-1986"     # built-in name, or a path to a data file
//! length_mm = 5.0
//! cut_angle_deg = 41.9
//!
//! [pump]
//! center_nm = 405.0
//! bandwidth_fwhm_nm = 0.53
//! profile = "gaussian"            # or "flat_top"
//! beam_radius_mm = 0.7
//! focal_length_mm = 50.0
//! center_angle = "degenerate"     # or an internal angle in degrees
//!
//! [mask]
//! kind = "pattern"                # open | slits | slit | pattern | physical | angles | design
//! bins = 41
//! widths = "5-3-5"
//! leading = "block"
//! ```
//!
//! Every field except `mode` has a default; [`ScenarioConfig::effective`]
//! writes them all out.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{DEFAULT_MIN_SEPARATION_NM, DEFAULT_THRESHOLD_FRACTION};
use crate::crystal::{CrystalSpec, SellmeierData, BUILTIN_BBO_NAME};
use crate::designer::DesignObjective;
use crate::error::{Error, Result};
use crate::jsa::{Axis, SpectralGrid, SuperpositionMode, DEFAULT_GRID_MAX_NM, DEFAULT_GRID_MIN_NM, DEFAULT_GRID_POINTS};
use crate::phase_matching::{solve_degenerate_angle, PhaseMatchConfig};
use crate::pump::{
    centered_slit, explicit_bins, mask_from_pattern, mask_from_physical, mask_from_slits, parse_widths, AngleBin,
    Leading, MaskSpec, ProfileKind, PumpSpec, DEFAULT_APERTURE_MM, DEFAULT_BEAM_RADIUS_MM, DEFAULT_FOCAL_LENGTH_MM,
    DEFAULT_PUMP_FWHM_NM, DEFAULT_PUMP_NM,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub mode: SuperpositionMode,
    #[serde(default)]
    pub crystal: CrystalConfig,
    #[serde(default)]
    pub pump: PumpConfig,
    #[serde(default)]
    pub grid: GridConfig,
    pub mask: MaskConfig,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CrystalConfig {
    pub sellmeier: String,
    pub length_mm: f64,
    pub cut_angle_deg: f64,
    pub azimuth_deg: f64,
}

impl Default for CrystalConfig {
    fn default() -> Self {
        CrystalConfig {
            sellmeier: BUILTIN_BBO_NAME.into(),
            length_mm: 5.0,
            cut_angle_deg: 41.9,
            azimuth_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CenterAngle {
    Degrees(f64),
    /// `"degenerate"`: the angle phase matching degenerate down-conversion.
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PumpConfig {
    pub center_nm: f64,
    pub bandwidth_fwhm_nm: f64,
    pub profile: ProfileKind,
    pub beam_radius_mm: f64,
    pub focal_length_mm: f64,
    pub center_angle: CenterAngle,
}

impl Default for PumpConfig {
    fn default() -> Self {
        PumpConfig {
            center_nm: DEFAULT_PUMP_NM,
            bandwidth_fwhm_nm: DEFAULT_PUMP_FWHM_NM,
            profile: ProfileKind::Gaussian,
            beam_radius_mm: DEFAULT_BEAM_RADIUS_MM,
            focal_length_mm: DEFAULT_FOCAL_LENGTH_MM,
            center_angle: CenterAngle::Named("degenerate".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub signal_min_nm: f64,
    pub signal_max_nm: f64,
    pub idler_min_nm: f64,
    pub idler_max_nm: f64,
    pub signal_points: usize,
    pub idler_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            signal_min_nm: DEFAULT_GRID_MIN_NM,
            signal_max_nm: DEFAULT_GRID_MAX_NM,
            idler_min_nm: DEFAULT_GRID_MIN_NM,
            idler_max_nm: DEFAULT_GRID_MAX_NM,
            signal_points: DEFAULT_GRID_POINTS,
            idler_points: DEFAULT_GRID_POINTS,
        }
    }
}

impl GridConfig {
    pub fn grid(&self) -> SpectralGrid {
        SpectralGrid {
            signal: Axis::new(self.signal_min_nm, self.signal_max_nm, self.signal_points),
            idler: Axis::new(self.idler_min_nm, self.idler_max_nm, self.idler_points),
        }
    }

    pub fn with_points(mut self, signal: usize, idler: usize) -> Self {
        self.signal_points = signal;
        self.idler_points = idler;
        self
    }
}

fn default_bins() -> usize {
    41
}

fn default_aperture() -> f64 {
    DEFAULT_APERTURE_MM
}

fn default_budget() -> usize {
    400
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MaskConfig {
    Open {
        #[serde(default = "default_bins")]
        bins: usize,
        #[serde(default = "default_aperture")]
        aperture_mm: f64,
    },
    /// Explicit blocked runs, 1-based `[start, width]`.
    Slits {
        #[serde(default = "default_bins")]
        bins: usize,
        #[serde(default = "default_aperture")]
        aperture_mm: f64,
        blocks: Vec<(usize, usize)>,
    },
    /// One blocked run centered on a 1-based bin.
    Slit {
        #[serde(default = "default_bins")]
        bins: usize,
        #[serde(default = "default_aperture")]
        aperture_mm: f64,
        center: usize,
        width: usize,
    },
    /// Alternating runs such as `"4-1-4"`, centered in the mask.
    Pattern {
        #[serde(default = "default_bins")]
        bins: usize,
        #[serde(default = "default_aperture")]
        aperture_mm: f64,
        widths: String,
        leading: Leading,
    },
    /// Block lines in mm, `[center_mm, width_mm]`, measured from the beam axis.
    Physical {
        #[serde(default = "default_bins")]
        bins: usize,
        #[serde(default = "default_aperture")]
        aperture_mm: f64,
        blocks_mm: Vec<(f64, f64)>,
    },
    /// Equal-weight rays at fixed internal angles, bypassing the lens map.
    Angles { angles_deg: Vec<f64> },
    /// Runs the designer and simulates the winning layout.
    Design {
        #[serde(default = "default_bins")]
        bins: usize,
        #[serde(default = "default_aperture")]
        aperture_mm: f64,
        objective: DesignObjective,
        #[serde(default = "default_budget")]
        budget: usize,
        #[serde(default = "default_true")]
        exhaustive: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub threshold_fraction: f64,
    pub min_separation_nm: f64,
    pub overlaps: bool,
    /// Schmidt decomposition; needs coherent mode.
    pub schmidt: bool,
    pub plots: bool,
    pub exports: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            threshold_fraction: DEFAULT_THRESHOLD_FRACTION,
            min_separation_nm: DEFAULT_MIN_SEPARATION_NM,
            overlaps: true,
            schmidt: false,
            plots: true,
            exports: true,
        }
    }
}

/// Pump shaping after validation: either a mask through the lens map or a
/// fixed set of rays.
#[derive(Debug, Clone)]
pub enum PumpShaping {
    Mask(MaskSpec),
    Rays(Vec<AngleBin>),
    Design {
        bins: usize,
        aperture_mm: f64,
        objective: DesignObjective,
        budget: usize,
        exhaustive: bool,
    },
}

/// A validated scenario with every domain object built.
#[derive(Debug, Clone)]
pub struct ResolvedScenario {
    pub config: ScenarioConfig,
    pub phase: PhaseMatchConfig,
    pub pump: PumpSpec,
    pub grid: SpectralGrid,
    pub shaping: PumpShaping,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            what: "scenario".into(),
            reason: e.to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        // relative data files resolve against the scenario's directory
        if cfg.crystal.sellmeier != BUILTIN_BBO_NAME {
            let p = Path::new(&cfg.crystal.sellmeier);
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.crystal.sellmeier = dir.join(p).display().to_string();
                }
            }
        }
        Ok(cfg)
    }

    /// The configuration with every default written out.
    pub fn effective(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn crystal_spec(&self) -> Result<CrystalSpec> {
        let c = &self.crystal;
        let data = if c.sellmeier == BUILTIN_BBO_NAME {
            SellmeierData::builtin_bbo()
        } else {
            let path = Path::new(&c.sellmeier);
            if !path.exists() {
                return Err(Error::invalid(
                    "crystal.sellmeier",
                    format!("`{}` is neither a built-in set nor an existing file", c.sellmeier),
                ));
            }
            SellmeierData::from_file(path).map_err(|e| e.context("crystal.sellmeier"))?
        };
        CrystalSpec::new(data, c.length_mm, c.cut_angle_deg, c.azimuth_deg)
    }

    /// Checks every parameter and builds the domain objects, without
    /// evaluating any spectrum.
    pub fn resolve(&self) -> Result<ResolvedScenario> {
        let crystal = self.crystal_spec()?;
        let phase = PhaseMatchConfig::type_ii(crystal);

        let grid = self.grid.grid();
        grid.validate()?;
        let (lo, hi) = phase.crystal.valid_range_um();
        for (field, v) in [
            ("grid.signal_min_nm", self.grid.signal_min_nm),
            ("grid.signal_max_nm", self.grid.signal_max_nm),
            ("grid.idler_min_nm", self.grid.idler_min_nm),
            ("grid.idler_max_nm", self.grid.idler_max_nm),
        ] {
            if !(v * 1e-3 >= lo && v * 1e-3 <= hi) {
                return Err(Error::invalid(field, format!("{v} nm outside the dispersion data range")));
            }
        }

        let p = &self.pump;
        let center_angle_deg = match &p.center_angle {
            CenterAngle::Degrees(d) => *d,
            CenterAngle::Named(n) if n == "degenerate" => {
                if !(p.center_nm > 0.0) {
                    return Err(Error::invalid("pump.center_nm", "must be > 0"));
                }
                solve_degenerate_angle(&phase, p.center_nm)
                    .map_err(|e| Error::invalid("pump.center_angle", e.to_string()))?
                    .to_degrees()
            }
            CenterAngle::Named(n) => {
                return Err(Error::invalid(
                    "pump.center_angle",
                    format!("`{n}`: expected \"degenerate\" or a number of degrees"),
                ))
            }
        };
        let pump = PumpSpec::from_fwhm(
            p.center_nm,
            p.bandwidth_fwhm_nm,
            p.profile,
            p.beam_radius_mm,
            p.focal_length_mm,
            center_angle_deg,
        )?;
        phase
            .crystal
            .index_extraordinary_at_angle(pump.center_nm * 1e-3, center_angle_deg.to_radians())
            .map_err(|e| Error::invalid("pump.center_nm", e.to_string()))?;

        let a = &self.analysis;
        if !(a.threshold_fraction > 0.0 && a.threshold_fraction < 1.0) {
            return Err(Error::invalid("analysis.threshold_fraction", "must lie in (0, 1)"));
        }
        if !(a.min_separation_nm >= 0.0) {
            return Err(Error::invalid("analysis.min_separation_nm", "must be >= 0"));
        }
        if a.schmidt && self.mode == SuperpositionMode::Incoherent {
            return Err(Error::invalid("analysis.schmidt", "Schmidt analysis needs coherent mode"));
        }

        let shaping = self.mask.resolve()?;
        if let PumpShaping::Mask(m) = &shaping {
            if m.is_fully_blocked() {
                return Err(Error::invalid("mask", "every bin is blocked"));
            }
        }
        Ok(ResolvedScenario {
            config: self.clone(),
            phase,
            pump,
            grid,
            shaping,
        })
    }
}

impl MaskConfig {
    fn resolve(&self) -> Result<PumpShaping> {
        let with = |m: Result<MaskSpec>, aperture: f64| -> Result<PumpShaping> {
            Ok(PumpShaping::Mask(m?.with_aperture(aperture)?))
        };
        let bins_ok = |bins: usize| {
            if bins == 0 {
                Err(Error::invalid("mask.bins", "must be >= 1"))
            } else {
                Ok(())
            }
        };
        match self {
            MaskConfig::Open { bins, aperture_mm } => {
                bins_ok(*bins)?;
                with(MaskSpec::open(*bins), *aperture_mm)
            }
            MaskConfig::Slits {
                bins,
                aperture_mm,
                blocks,
            } => {
                bins_ok(*bins)?;
                with(mask_from_slits(*bins, blocks), *aperture_mm)
            }
            MaskConfig::Slit {
                bins,
                aperture_mm,
                center,
                width,
            } => {
                bins_ok(*bins)?;
                with(centered_slit(*bins, *center, *width), *aperture_mm)
            }
            MaskConfig::Pattern {
                bins,
                aperture_mm,
                widths,
                leading,
            } => {
                bins_ok(*bins)?;
                with(mask_from_pattern(*bins, &parse_widths(widths)?, *leading), *aperture_mm)
            }
            MaskConfig::Physical {
                bins,
                aperture_mm,
                blocks_mm,
            } => {
                bins_ok(*bins)?;
                with(mask_from_physical(blocks_mm, *aperture_mm, *bins), *aperture_mm)
            }
            MaskConfig::Angles { angles_deg } => Ok(PumpShaping::Rays(explicit_bins(angles_deg)?)),
            MaskConfig::Design {
                bins,
                aperture_mm,
                objective,
                budget,
                exhaustive,
            } => {
                bins_ok(*bins)?;
                objective.validate()?;
                if *budget == 0 {
                    return Err(Error::invalid("mask.budget", "must be >= 1"));
                }
                if !(*aperture_mm > 0.0) {
                    return Err(Error::invalid("mask.aperture_mm", "must be > 0"));
                }
                Ok(PumpShaping::Design {
                    bins: *bins,
                    aperture_mm: *aperture_mm,
                    objective: objective.clone(),
                    budget: *budget,
                    exhaustive: *exhaustive,
                })
            }
        }
    }
}
