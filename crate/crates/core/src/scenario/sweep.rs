//! Parameter sweeps over one dotted scenario field.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::ScenarioConfig;
use super::run::run_scenario;
use crate::error::{Error, Result};

pub const SWEEP_SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone)]
pub struct SweepItem {
    pub value: toml::Value,
    pub directory: PathBuf,
    pub outcome: std::result::Result<SweepRow, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub peak_count: usize,
    pub peak_centers_nm: Vec<f64>,
    pub mean_spacing_nm: Option<f64>,
    pub signal_fwhm_nm: Option<f64>,
    pub mode_weight_cv: f64,
}

/// Replaces the value at a dotted path such as `pump.beam_radius_mm` or
/// `mask.widths`. Intermediate tables must already exist, so typos fail
/// instead of silently adding fields.
pub fn set_dotted(config: &ScenarioConfig, path: &str, value: toml::Value) -> Result<ScenarioConfig> {
    let mut root = toml::Value::try_from(config).map_err(|e| Error::invalid("sweep", e.to_string()))?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(Error::invalid("sweep.parameter", format!("`{path}` is not a dotted path")));
    }
    let (last, parents) = keys.split_last().unwrap();
    let mut node = &mut root;
    for k in parents {
        node = node
            .get_mut(*k)
            .filter(|v| v.is_table())
            .ok_or_else(|| Error::invalid("sweep.parameter", format!("no table `{k}` in `{path}`")))?;
    }
    let table = node.as_table_mut().expect("checked above");
    table.insert((*last).to_string(), value);
    let text = toml::to_string(&root).map_err(|e| Error::invalid("sweep", e.to_string()))?;
    ScenarioConfig::from_toml_str(&text).map_err(|e| e.context(format!("sweep.parameter `{path}`")))
}

/// Parses a comma-separated list of sweep values. Each item is read as a
/// TOML value when it parses as one and as a string otherwise, so
/// `0.5,0.7` gives floats and `5-3-5,4-3-4` gives strings.
pub fn parse_values(list: &str) -> Result<Vec<toml::Value>> {
    let items: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(Error::invalid("sweep.values", "empty value list"));
    }
    Ok(items
        .into_iter()
        .map(|s| {
            format!("v = {s}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(s.to_string()))
        })
        .collect())
}

fn label(value: &toml::Value) -> String {
    let raw = match value {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    raw.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

/// Runs one scenario per value, in parallel, each into its own
/// subdirectory of `out_dir`. A failing item is recorded and the rest
/// carry on. The summary lists items in the order given.
pub fn run_sweep(base: &ScenarioConfig, parameter: &str, values: &[toml::Value], out_dir: &Path) -> Result<Vec<SweepItem>> {
    if values.is_empty() {
        return Err(Error::invalid("sweep.values", "empty value list"));
    }
    // every item must at least parse before anything runs
    let configs: Vec<ScenarioConfig> = values
        .iter()
        .map(|v| set_dotted(base, parameter, v.clone()))
        .collect::<Result<_>>()?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let items: Vec<SweepItem> = configs
        .into_par_iter()
        .zip(values.par_iter())
        .enumerate()
        .map(|(k, (mut cfg, value))| {
            let dir = out_dir.join(format!("{k:03}_{}", label(value)));
            cfg.name = format!("{} [{parameter}={}]", base.name, label(value));
            let outcome = run_scenario(&cfg, &dir)
                .map(|r| {
                    let rep = &r.simulation.report;
                    let sp = &rep.signal_spacings_nm;
                    SweepRow {
                        peak_count: rep.signal_peaks.len(),
                        peak_centers_nm: rep.signal_peaks.centers(),
                        mean_spacing_nm: (!sp.is_empty()).then(|| sp.iter().sum::<f64>() / sp.len() as f64),
                        signal_fwhm_nm: rep.signal_fwhm_nm,
                        mode_weight_cv: rep.mode_weight_cv,
                    }
                })
                .map_err(|e| e.to_string());
            SweepItem {
                value: value.clone(),
                directory: dir,
                outcome,
            }
        })
        .collect();

    let path = out_dir.join(SWEEP_SUMMARY_FILE);
    fs::write(&path, summary_csv(parameter, &items)).map_err(|e| Error::io(&path, e))?;
    Ok(items)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn summary_csv(parameter: &str, items: &[SweepItem]) -> String {
    let mut out = format!("{parameter},status,peak_count,mean_spacing_nm,signal_fwhm_nm,mode_weight_cv,peak_centers_nm,error\n");
    for it in items {
        let v = label(&it.value);
        match &it.outcome {
            Ok(r) => {
                let centers: Vec<String> = r.peak_centers_nm.iter().map(|c| format!("{c:.3}")).collect();
                writeln!(
                    out,
                    "{v},ok,{},{},{},{},{},",
                    r.peak_count,
                    opt(r.mean_spacing_nm),
                    opt(r.signal_fwhm_nm),
                    r.mode_weight_cv,
                    centers.join(" ")
                )
                .unwrap();
            }
            Err(e) => {
                let msg = e.replace(['"', '\n'], "'");
                writeln!(out, "{v},failed,,,,,,\"{msg}\"").unwrap();
            }
        }
    }
    out
}
