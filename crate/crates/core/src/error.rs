use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the kernel domain ({domain})")]
    OutOfDomain {
        point: Vec<Complex64>,
        domain: String,
    },

    #[error("singular evaluation in `{op}` at slots {point:?}")]
    Singular {
        op: &'static str,
        point: Vec<Complex64>,
    },

    #[error("derivative depth {requested} exceeds the supported maximum {max}")]
    DerivativeOrder { requested: usize, max: usize },

    #[error("orbit normalization failed on bracket [{lo}, {hi}]: {detail}")]
    Normalization { lo: f64, hi: f64, detail: String },

    #[error(
        "metric is not positive definite at {point:?} (smallest eigenvalue {min_eigenvalue:e})"
    )]
    DegenerateMetric {
        point: Vec<Complex64>,
        min_eigenvalue: f64,
    },

    #[error("quotient metric is not positive definite at {point:?} (smallest eigenvalue {min_eigenvalue:e})")]
    DegenerateQuotient {
        point: Vec<Complex64>,
        min_eigenvalue: f64,
    },

    #[error("sesquiholomorphic extension vanishes at {point:?}")]
    VanishingExtension { point: Vec<Complex64> },

    #[error("capability exceeded: {0}")]
    Capability(String),

    #[error("coefficient table is missing S_{0}")]
    MissingCoefficient(usize),

    #[error("quadrature did not converge: estimated relative error {estimate:e} after {nodes} nodes per axis")]
    Quadrature { estimate: f64, nodes: usize },

    #[error("symbol is not admissible: {0}")]
    Symbol(String),

    #[error("function is not invariant under the circle action (spread {spread:e})")]
    NotInvariant { spread: f64 },

    #[error("unsupported point: {0}")]
    UnsupportedPoint(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("series order mismatch: {0}")]
    OrderMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Module that raises this kind of error, for user-facing reports.
    pub fn module(&self) -> &'static str {
        match self {
            Error::OutOfDomain { .. } | Error::Singular { .. } | Error::DerivativeOrder { .. } => {
                "polarized-calculus"
            }
            Error::DegenerateMetric { .. } | Error::VanishingExtension { .. } => "kahler-geometry",
            Error::Normalization { .. }
            | Error::DegenerateQuotient { .. }
            | Error::NotInvariant { .. }
            | Error::InvalidModel(_) => "circle-quotient",
            Error::Quadrature { .. } => "englis-laplace",
            Error::Capability(_) | Error::MissingCoefficient(_) | Error::OrderMismatch(_) => {
                "coefficients"
            }
            Error::Symbol(_) | Error::UnsupportedPoint(_) => "model-oracle",
            Error::Dimension { .. } | Error::Config(_) | Error::Io(_) => "experiments",
        }
    }
}
