//! Scenario files, named presets, runs and sweeps.

mod config;
mod presets;
mod run;
mod sweep;

pub use config::{
    AnalysisConfig, CenterAngle, CrystalConfig, GridConfig, MaskConfig, PumpConfig, PumpShaping, ResolvedScenario,
    ScenarioConfig,
};
pub use presets::{preset, presets, Preset};
pub use run::{
    run_scenario, simulate, verify_index, DesignDocument, DesignSummary, IndexEntry, MaskSummary, OutputIndex, Report, RunOutput,
    SchmidtSummary, Simulation, DESIGN_FILE, INDEX_FILE,
};
pub use sweep::{parse_values, run_sweep, set_dotted, summary_csv, SweepItem, SweepRow, SWEEP_SUMMARY_FILE};
