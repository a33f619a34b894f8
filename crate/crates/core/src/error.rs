use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),

    /// A named field failed validation.
    #[error("invalid field `{field}`: {message}")]
    Field { field: &'static str, message: String },

    #[error("field `energies` has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("field `energies` has non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("{what} of size {size} exceeds guard {limit}")]
    SizeGuard {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("von Mises initialization requires an angle guess")]
    MissingGuess,

    #[error("delta initialization requires `true_angle_indices` on the landscape")]
    MissingTrueAngles,

    #[error("transition matrix spectrum is not real (max |imag| = {max_imag:e})")]
    NonRealSpectrum { max_imag: f64 },

    #[error("gap bounds not applicable: second eigenvalue {lambda1} outside [0, 1)")]
    BoundsNotApplicable { lambda1: f64 },

    #[error("detailed balance violated between states {i} and {j} (residual {residual:e})")]
    DetailedBalance { i: usize, j: usize, residual: f64 },

    #[error("gibbs weight of state {state} underflowed to zero")]
    ZeroGibbsWeight { state: usize },

    #[error("no overlap between series (t = 1..{len}) and range {t_min}..{t_max}")]
    EmptyRange { len: usize, t_min: usize, t_max: usize },

    #[error("degenerate variance: both groups are constant")]
    DegenerateVariance,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("qasm parse error at line {line}: {message}")]
    QasmParse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    /// Short stable identifier used in machine-readable CLI errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Field { .. } => "field",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::NonFinite { .. } => "non_finite",
            Error::SizeGuard { .. } => "size_guard",
            Error::Domain(_) => "domain",
            Error::MissingGuess => "missing_guess",
            Error::MissingTrueAngles => "missing_true_angles",
            Error::NonRealSpectrum { .. } => "non_real_spectrum",
            Error::BoundsNotApplicable { .. } => "bounds_not_applicable",
            Error::DetailedBalance { .. } => "detailed_balance",
            Error::ZeroGibbsWeight { .. } => "zero_gibbs_weight",
            Error::EmptyRange { .. } => "empty_range",
            Error::DegenerateVariance => "degenerate_variance",
            Error::Unsupported(_) => "unsupported",
            Error::QasmParse { .. } => "qasm_parse",
            Error::Config(_) => "config",
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn field(field: &'static str, message: impl Into<String>) -> Self {
        Error::Field {
            field,
            message: message.into(),
        }
    }
}
