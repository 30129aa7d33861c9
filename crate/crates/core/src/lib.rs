//! Frequency-entangled qudits from spatially shaped SPDC pumping.
//!
//! A slit mask cuts the pump's cross-section into bins. Through the
//! focusing lens each bin reaches the crystal at its own angle, and the
//! angle-dependent phase matching turns each angle into a separate
//! frequency mode of the down-converted pair.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod crystal;
pub mod designer;
pub mod error;
pub mod export;
pub mod jsa;
pub mod phase_matching;
pub mod pump;
pub mod render;
pub mod roots;
pub mod scenario;
pub mod units;

pub use analysis::{
    find_peaks, fwhm, mode_overlap, mode_weights, peak_spacing, schmidt_decompose, Peak, PeakCatalog, SchmidtReport,
};
pub use crystal::{CrystalSpec, SellmeierData, SellmeierSet};
pub use designer::{DesignObjective, DesignResult};
pub use error::{Error, Result};
pub use jsa::{
    marginal, superposed_jsi, JointSpectrum, MarginalSpectrum, SpectralAxis, SpectralGrid, SuperpositionMode,
};
pub use phase_matching::{central_wavelengths_at_angle, delta_k, solve_degenerate_angle, PhaseMatchConfig};
pub use pump::{AngleBin, MaskSpec, ProfileKind, PumpSpec};
