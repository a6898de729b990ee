use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Whether an error comes from malformed input or from a numerical
/// precondition that the input violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("shift {value} is not a multiple of the lattice step {step}")]
    OffLattice { value: f64, step: f64 },

    #[error("frequency range {requested} exceeds the Nyquist bound {nyquist}")]
    Nyquist { requested: f64, nyquist: f64 },

    #[error("window is not L2-normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("wavelet has non-zero mean (|ĝ(0)| = {value})")]
    NonZeroMean { value: f64 },

    #[error("wavelet is not even: admissibility differs between ±ω ({plus} vs {minus})")]
    NotEven { plus: f64, minus: f64 },

    #[error("wavelet is not admissibility-normalized (constant {constant})")]
    NotAdmissible { constant: f64 },

    #[error("scale {scale} is below the resolvable limit {limit}")]
    UnresolvableScale { scale: f64, limit: f64 },

    #[error("scale range too narrow: boundary rows carry {fraction:.3e} of the norm")]
    ScaleRange { fraction: f64 },

    #[error("evaluation overflow at |z| = {modulus}")]
    Overflow { modulus: f64 },

    #[error("quadrature tail estimate {tail:.3e} exceeds tolerance {tolerance:.1e}")]
    QuadratureTail { tail: f64, tolerance: f64 },

    #[error("series truncation error {estimate:.3e} exceeds tolerance {tolerance:.1e}")]
    Truncation { estimate: f64, tolerance: f64 },

    #[error("region `{region}` is not defined on a {field} field")]
    IncompatibleRegion {
        region: &'static str,
        field: &'static str,
    },

    #[error("weight is not finite and positive at ({at0}, {at1})")]
    InvalidWeight { at0: f64, at1: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("sample file: {0}")]
    Samples(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Stable snake_case identifier for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::OffLattice { .. } => "off_lattice",
            Error::Nyquist { .. } => "nyquist",
            Error::NotNormalized { .. } => "not_normalized",
            Error::NonZeroMean { .. } => "non_zero_mean",
            Error::NotEven { .. } => "not_even",
            Error::NotAdmissible { .. } => "not_admissible",
            Error::UnresolvableScale { .. } => "unresolvable_scale",
            Error::ScaleRange { .. } => "scale_range",
            Error::Overflow { .. } => "overflow",
            Error::QuadratureTail { .. } => "quadrature_tail",
            Error::Truncation { .. } => "truncation",
            Error::IncompatibleRegion { .. } => "incompatible_region",
            Error::InvalidWeight { .. } => "invalid_weight",
            Error::NonFinite(_) => "non_finite",
            Error::Samples(_) => "samples",
            Error::Io(_) => "io",
        }
    }

    /// Parameter or key the error is about, when there is one.
    pub fn key(&self) -> Option<&'static str> {
        match self {
            Error::InvalidParameter { name, .. } => Some(name),
            _ => None,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidGrid(_)
            | Error::InvalidParameter { .. }
            | Error::GridMismatch(_)
            | Error::OffLattice { .. }
            | Error::IncompatibleRegion { .. }
            | Error::Samples(_)
            | Error::Io(_) => ErrorClass::Config,
            Error::Nyquist { .. }
            | Error::NotNormalized { .. }
            | Error::NonZeroMean { .. }
            | Error::NotEven { .. }
            | Error::NotAdmissible { .. }
            | Error::UnresolvableScale { .. }
            | Error::ScaleRange { .. }
            | Error::Overflow { .. }
            | Error::QuadratureTail { .. }
            | Error::Truncation { .. }
            | Error::InvalidWeight { .. }
            | Error::NonFinite(_) => ErrorClass::Numeric,
        }
    }
}
