use std::path::PathBuf;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cross-section operator is not strictly positive: smallest eigenvalue {nu_sq}")]
    PositivityViolated { nu_sq: f64 },

    #[error("invalid cone dimension n = {0} (need n >= 2)")]
    InvalidDimension(i64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resolution too low: {0}")]
    ResolutionTooLow(String),

    #[error("{method} did not converge at nu = {nu}, r = {r}")]
    NotConverged {
        method: &'static str,
        nu: f64,
        r: f64,
    },

    #[error("truncated tail is not negligible: relative tail {relative:.3e} exceeds {limit:.1e}")]
    TailNotNegligible { relative: f64, limit: f64 },

    #[error("oscillation under-resolved: node spacing {spacing:.3e} exceeds {required:.3e}")]
    OscillationUnderResolved { spacing: f64, required: f64 },

    #[error("invalid radial span [{r_min}, {r_max}]")]
    InvalidSpan { r_min: f64, r_max: f64 },

    #[error("mode truncation too coarse: reconstruction residual {residual:.3e} exceeds {tolerance:.1e}")]
    TruncationTooCoarse { residual: f64, tolerance: f64 },

    #[error("time sampling too coarse: spacing {spacing:.3e} exceeds {required:.3e}")]
    UnderResolvedTime { spacing: f64, required: f64 },

    #[error("weight |x|^-{beta} is not locally square-integrable in dimension {n}")]
    WeightNotIntegrable { beta: f64, n: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("exponent pair not admissible: {0}")]
    AdmissibilityViolated(String),

    #[error("regime unavailable: {0}")]
    RegimeUnavailable(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
