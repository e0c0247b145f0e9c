use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series truncation did not stabilize below tolerance {tol:e} before order {cap}")]
    NonConvergence { tol: f64, cap: usize },

    #[error("adaptive quadrature exceeded depth {depth} on [{a}, {b}]")]
    QuadratureDepthExceeded { a: f64, b: f64, depth: usize },

    #[error("parse error at position {position}: expected one of {}", expected.join(", "))]
    Parse {
        position: usize,
        expected: Vec<String>,
    },

    #[error("sequence `{which}` is not strictly increasing and positive near n = {n}")]
    NotMonotone { which: String, n: u64 },

    #[error("integer overflow while evaluating {0}")]
    Overflow(String),

    #[error("cannot build a covariance density from an undetermined classification")]
    UndeterminedClass,

    #[error("covariance {c} exceeds the Cauchy-Schwarz bound for variances {v1} and {v2}")]
    InvalidCovariance { c: f64, v1: f64, v2: f64 },

    #[error("window has no increments: floor({n} * {t}) = 0")]
    DegenerateWindow { n: u64, t: f64 },

    #[error("circulant embedding has a negative eigenvalue {eigenvalue:e}")]
    EmbeddingNotPsd { eigenvalue: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("sub-grid {n} does not divide ensemble grid {grid}")]
    GridMismatch { n: u64, grid: u64 },

    #[error("diffusion matrix is not real at s = {s}: 1 - r^2 = {value:e}")]
    SigmaNotReal { s: f64, value: f64 },
}

impl Error {
    /// Numeric failures map to a distinct CLI exit code from usage errors.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::QuadratureDepthExceeded { .. }
                | Error::EmbeddingNotPsd { .. }
                | Error::SigmaNotReal { .. }
                | Error::Overflow(_)
        )
    }
}
