//! Running a scenario: simulation without IO, then the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{PumpShaping, ResolvedScenario, ScenarioConfig};
use crate::analysis::{
    coefficient_of_variation, find_peaks, fwhm, mode_overlap, mode_weights, peak_spacing, schmidt_decompose,
    PeakCatalog,
};
use crate::designer::{reevaluate, search, DesignResult, Evaluation, ForwardModel, SearchOptions, SEARCH_GRID_POINTS};
use crate::error::{Error, Result};
use crate::export::{jsi_to_binary, jsi_to_csv, marginal_to_csv};
use crate::jsa::{marginal, superposed_jsi, JointSpectrum, MarginalSpectrum, SpectralAxis, SpectralGrid};
use crate::pump::{bin_angles, AngleBin, MaskSpec};
use crate::render::{jsi_image, marginal_image, save_png};

/// How many leading Schmidt coefficients go into the report.
const REPORTED_SCHMIDT_COEFFICIENTS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSummary {
    pub bins: usize,
    pub aperture_mm: f64,
    pub pattern: String,
    /// Blocked runs, 1-based `[start, width]`.
    pub blocks: Vec<(usize, usize)>,
    /// Blocked runs as `[center_mm, width_mm]`.
    pub blocks_mm: Vec<(f64, f64)>,
}

impl MaskSummary {
    pub fn of(mask: &MaskSpec) -> Self {
        MaskSummary {
            bins: mask.bins(),
            aperture_mm: mask.aperture_mm,
            pattern: mask.pattern_string(),
            blocks: mask.blocks(),
            blocks_mm: mask.physical_blocks(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSummary {
    pub schmidt_number: f64,
    pub entropy_bits: f64,
    pub reconstruction_error: f64,
    pub leading_coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignSummary {
    pub objective: f64,
    pub search_objective: f64,
    pub evaluations: usize,
    pub exhaustive: bool,
    pub search_points: usize,
    pub final_evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub mode: String,
    pub center_angle_deg: f64,
    /// Number of angular components with non-zero weight.
    pub active_bins: usize,
    pub signal_peaks: PeakCatalog,
    pub idler_peaks: PeakCatalog,
    pub signal_spacings_nm: Vec<f64>,
    /// Width of the whole signal marginal, absent when it is cut by the grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signal_fwhm_nm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub idler_fwhm_nm: Option<f64>,
    pub mode_weights: Vec<f64>,
    pub mode_weight_cv: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlaps: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schmidt: Option<SchmidtSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask: Option<MaskSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSummary>,
}

impl Report {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("report serializes")
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub scenario: ResolvedScenario,
    pub bins: Vec<AngleBin>,
    pub mask: Option<MaskSpec>,
    pub design: Option<DesignResult>,
    pub spectrum: JointSpectrum,
    pub signal: MarginalSpectrum,
    pub idler: MarginalSpectrum,
    pub report: Report,
}

fn design(r: &ResolvedScenario) -> Result<(MaskSpec, DesignResult, DesignSummary)> {
    let PumpShaping::Design {
        bins,
        aperture_mm,
        objective,
        budget,
        exhaustive,
    } = &r.shaping
    else {
        unreachable!("design() called on a non-design scenario")
    };
    let coarse = SpectralGrid {
        signal: crate::jsa::Axis::new(r.grid.signal.min_nm, r.grid.signal.max_nm, SEARCH_GRID_POINTS),
        idler: crate::jsa::Axis::new(r.grid.idler.min_nm, r.grid.idler.max_nm, SEARCH_GRID_POINTS),
    };
    let mut model = ForwardModel::new(
        r.phase.crystal.clone(),
        r.pump.clone(),
        coarse,
        r.config.mode,
        *bins,
        *aperture_mm,
    );
    model.threshold_fraction = r.config.analysis.threshold_fraction;
    model.min_separation_nm = r.config.analysis.min_separation_nm;
    let mut options = SearchOptions::new(*budget);
    options.exhaustive = *exhaustive;
    let result = search(objective, &model, &options)?;
    let final_evaluation = reevaluate(&result, &model, objective, r.grid);
    let summary = DesignSummary {
        objective: final_evaluation.objective,
        search_objective: result.evaluation.objective,
        evaluations: result.trace.evaluations,
        exhaustive: result.trace.exhaustive_ran,
        search_points: SEARCH_GRID_POINTS,
        final_evaluation,
    };
    Ok((result.mask.clone(), result, summary))
}

/// Validates and evaluates a scenario. Touches no files.
pub fn simulate(config: &ScenarioConfig) -> Result<Simulation> {
    let scenario = config.resolve()?;
    let crystal = &scenario.phase.crystal;
    let (mask, design_result, design_summary) = match &scenario.shaping {
        PumpShaping::Mask(m) => (Some(m.clone()), None, None),
        PumpShaping::Rays(_) => (None, None, None),
        PumpShaping::Design { .. } => {
            let (m, r, s) = design(&scenario)?;
            (Some(m), Some(r), Some(s))
        }
    };
    let bins = match (&scenario.shaping, &mask) {
        (PumpShaping::Rays(rays), _) => rays.clone(),
        (_, Some(m)) => bin_angles(&scenario.pump, m, crystal)?,
        _ => unreachable!(),
    };

    let spectrum = superposed_jsi(&scenario.phase, &scenario.pump, &scenario.grid, &bins, config.mode)?;
    let signal = marginal(&spectrum, SpectralAxis::Signal);
    let idler = marginal(&spectrum, SpectralAxis::Idler);

    let a = &config.analysis;
    let signal_peaks = find_peaks(&signal, a.threshold_fraction, a.min_separation_nm);
    let idler_peaks = find_peaks(&idler, a.threshold_fraction, a.min_separation_nm);
    let spacings = if signal_peaks.len() >= 2 {
        peak_spacing(&signal_peaks)?
    } else {
        Vec::new()
    };
    let weights = mode_weights(&signal, &signal_peaks);
    let overlaps = if a.overlaps && signal_peaks.len() >= 2 {
        let n = signal_peaks.len();
        let mut m = vec![vec![0.0; n]; n];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = mode_overlap(&spectrum, &signal_peaks, i, j)?;
            }
        }
        Some(m)
    } else {
        None
    };
    let schmidt = if a.schmidt {
        let s = schmidt_decompose(&spectrum)?;
        Some(SchmidtSummary {
            schmidt_number: s.schmidt_number,
            entropy_bits: s.entropy_bits,
            reconstruction_error: s.reconstruction_error,
            leading_coefficients: s.coefficients.into_iter().take(REPORTED_SCHMIDT_COEFFICIENTS).collect(),
        })
    } else {
        None
    };

    let report = Report {
        name: config.name.clone(),
        mode: format!("{:?}", config.mode).to_lowercase(),
        center_angle_deg: scenario.pump.center_angle_deg,
        active_bins: bins.iter().filter(|b| b.weight.norm_sqr() > 0.0).count(),
        signal_fwhm_nm: fwhm(&signal).ok(),
        idler_fwhm_nm: fwhm(&idler).ok(),
        mode_weight_cv: coefficient_of_variation(&weights),
        mode_weights: weights,
        signal_spacings_nm: spacings,
        signal_peaks,
        idler_peaks,
        overlaps,
        schmidt,
        mask: mask.as_ref().map(MaskSummary::of),
        design: design_summary,
    };

    Ok(Simulation {
        scenario,
        bins,
        mask,
        design: design_result,
        spectrum,
        signal,
        idler,
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputIndex {
    pub scenario: String,
    pub files: Vec<IndexEntry>,
    /// Plots that could not be written; the run still succeeds.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

pub const INDEX_FILE: &str = "index.toml";
pub const DESIGN_FILE: &str = "design.toml";

/// The designed mask in every notation, plus its score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignDocument {
    pub mask: MaskSummary,
    pub design: DesignSummary,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub directory: PathBuf,
    pub simulation: Simulation,
    pub index: OutputIndex,
}

fn write(dir: &Path, name: &str, bytes: &[u8], index: &mut Vec<IndexEntry>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    index.push(IndexEntry {
        file: name.into(),
        sha256: hex::encode(Sha256::digest(bytes)),
        bytes: bytes.len() as u64,
    });
    Ok(())
}

fn write_png(dir: &Path, name: &str, img: &image::RgbImage, index: &mut Vec<IndexEntry>) -> Result<()> {
    let path = dir.join(name);
    save_png(img, &path)?;
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    index.push(IndexEntry {
        file: name.into(),
        sha256: hex::encode(Sha256::digest(&bytes)),
        bytes: bytes.len() as u64,
    });
    Ok(())
}

/// Validates, simulates and writes every output into `out_dir`. Nothing is
/// written when validation or the computation fails.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<RunOutput> {
    let simulation = simulate(config)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::new();
    write(out_dir, "effective_config.toml", config.effective().as_bytes(), &mut files)?;
    write(out_dir, "report.toml", simulation.report.to_toml().as_bytes(), &mut files)?;
    if config.analysis.exports {
        write(out_dir, "jsi.csv", jsi_to_csv(&simulation.spectrum).as_bytes(), &mut files)?;
        write(out_dir, "jsi.bin", &jsi_to_binary(&simulation.spectrum), &mut files)?;
        write(out_dir, "marginal_signal.csv", marginal_to_csv(&simulation.signal).as_bytes(), &mut files)?;
        write(out_dir, "marginal_idler.csv", marginal_to_csv(&simulation.idler).as_bytes(), &mut files)?;
    }
    if let (Some(mask), Some(design)) = (&simulation.report.mask, &simulation.report.design) {
        let doc = DesignDocument {
            mask: mask.clone(),
            design: design.clone(),
        };
        let text = toml::to_string(&doc).expect("design serializes");
        write(out_dir, DESIGN_FILE, text.as_bytes(), &mut files)?;
    }
    let mut warnings = Vec::new();
    if config.analysis.plots {
        let plots = [
            ("jsi.png", jsi_image(&simulation.spectrum)),
            ("marginal_signal.png", marginal_image(&simulation.signal, 640, 360)),
            ("marginal_idler.png", marginal_image(&simulation.idler, 640, 360)),
        ];
        for (name, img) in plots {
            if let Err(e) = write_png(out_dir, name, &img, &mut files) {
                warnings.push(format!("{name}: {e}"));
            }
        }
    }
    let index = OutputIndex {
        scenario: config.name.clone(),
        files,
        warnings,
    };
    let text = toml::to_string(&index).expect("index serializes");
    let path = out_dir.join(INDEX_FILE);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(RunOutput {
        directory: out_dir.to_path_buf(),
        simulation,
        index,
    })
}

/// Recomputes every checksum in an output directory's index. Returns the
/// files whose contents no longer match.
pub fn verify_index(out_dir: &Path) -> Result<Vec<String>> {
    let path = out_dir.join(INDEX_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let index: OutputIndex = toml::from_str(&text).map_err(|e| Error::Parse {
        what: INDEX_FILE.into(),
        reason: e.to_string(),
    })?;
    let mut bad = Vec::new();
    for entry in index.files {
        let p = out_dir.join(&entry.file);
        let ok = fs::read(&p)
            .map(|b| hex::encode(Sha256::digest(&b)) == entry.sha256)
            .unwrap_or(false);
        if !ok {
            bad.push(entry.file);
        }
    }
    Ok(bad)
}
