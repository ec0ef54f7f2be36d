use thiserror::Error;

/// Errors raised by the numerical routes.
///
/// Variants split into two families: input problems (bad parameters,
/// correlation functions that violate the hypotheses, unresolvable grids)
/// and numerical failures discovered while computing.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("negative spectral density {value:.3e} at mode {mode:?} (relative to max {max:.3e})")]
    Covariance {
        mode: Vec<i64>,
        value: f64,
        max: f64,
    },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("quadrature did not converge: achieved error {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("Laplace transform truncation: tail bound {tail:.3e} exceeds {tolerance:.3e}")]
    Truncation { tail: f64, tolerance: f64 },

    #[error("inverse Laplace transform inaccurate at t={t}: estimated error {estimate:.3e}")]
    Accuracy { t: f64, estimate: f64 },

    #[error("pole of the Laplace-domain moment at s={0}")]
    Pole(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("time step {dt} violates the stability bound {bound}")]
    Stability { dt: f64, bound: f64 },

    #[error("boundary contamination: tail mass {mass:.3e} exceeds {threshold:.3e} at t={t}")]
    Boundary { mass: f64, threshold: f64, t: f64 },

    #[error("instability: non-finite state at t={0}")]
    Instability(f64),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by the caller's configuration rather than by
    /// the numerics.
    pub fn is_input(&self) -> bool {
        matches!(
            self,
            Error::Input(_) | Error::Covariance { .. } | Error::Resolution(_) | Error::Domain(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
