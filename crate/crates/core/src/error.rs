use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain where the quantity is defined
    /// (superluminal frame velocity, nonpositive mass, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported cross-section shape for {operation}: {shape}")]
    UnsupportedShape {
        operation: &'static str,
        shape: &'static str,
    },

    #[error("raster mask is not a single connected region ({components} components)")]
    DisconnectedMask { components: usize },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error(
        "eigensolver did not converge after {iterations} iterations: \
         worst relative residual {residual:.3e} (pair {pair})"
    )]
    EigenNotConverged {
        iterations: usize,
        pair: usize,
        residual: f64,
    },

    #[error(
        "quadrature tolerance unreachable: best value {best}, achieved error {achieved:.3e} \
         with {panels} panels"
    )]
    QuadratureNotConverged {
        best: Complex64,
        achieved: f64,
        panels: usize,
    },

    #[error("cannot normalize a state with zero norm")]
    ZeroNorm,

    #[error("insufficient samples: {valid} valid, at least {required} required")]
    InsufficientSamples { valid: usize, required: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
