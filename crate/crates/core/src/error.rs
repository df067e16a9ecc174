use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("power-law exponent {exponent} is not summable in dimension {dimension} (need exponent > dimension)")]
    Summability { exponent: f64, dimension: usize },

    #[error("distance source set is empty")]
    EmptySource,

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("{what} did not converge (residual {residual:.3e})")]
    NonConvergence { what: &'static str, residual: f64 },

    #[error("box half-width {half_width} too small for T = {t_final}: need at least {required} ({detail})")]
    Preflight {
        half_width: usize,
        required: usize,
        t_final: f64,
        detail: String,
    },

    #[error("step size underflow at t = {t:.6} (h = {step:.3e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("observable is not Hermitian (imaginary residue {residue:.3e})")]
    NonHermitian { residue: f64 },

    #[error("z is too close to the spectrum (distance {distance:.3e})")]
    NearSpectrum { distance: f64 },

    #[error("derivative of order {requested} unavailable (built up to {available})")]
    DerivativeOrder { requested: usize, available: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("interpolation grid too coarse: {0}")]
    Interpolation(String),

    #[error("validation error at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}
