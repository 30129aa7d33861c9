use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("wavelength {wavelength_um} um outside the valid range [{min_um}, {max_um}] um")]
    WavelengthOutOfRange {
        wavelength_um: f64,
        min_um: f64,
        max_um: f64,
    },

    #[error("propagation angle {angle_rad} rad outside [0, pi/2]")]
    AngleOutOfRange { angle_rad: f64 },

    #[error("no phase-matching solution: {0}")]
    NoPhaseMatch(String),

    #[error("fully blocked pump: every mask bin has zero transmission")]
    FullyBlocked,

    #[error("mask block {start}+{width} lies outside bins 1..={bins}")]
    MaskBounds {
        start: usize,
        width: usize,
        bins: usize,
    },

    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },

    #[error("peak truncated by grid: half maximum is not bracketed")]
    PeakTruncated,

    #[error("insufficient peaks: need at least 2, found {0}")]
    InsufficientPeaks(usize),

    #[error("peak index {index} out of range for a catalog of {len}")]
    InvalidPeakIndex { index: usize, len: usize },

    #[error("amplitude unavailable: incoherent spectra only carry intensity")]
    AmplitudeUnavailable,

    #[error("failed to parse {what}: {reason}")]
    Parse { what: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// True for errors caused by bad input rather than by a failed computation.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Invalid { .. } | Error::Parse { .. } | Error::MaskBounds { .. } => true,
            Error::Context { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}
