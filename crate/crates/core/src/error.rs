use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("Gamma function pole at x = {0}")]
    Pole(f64),

    #[error("singular value at t = 0 (requires rho >= 1, got rho = {rho})")]
    Singularity { rho: f64 },

    /// The condition beta - gamma > -1/2 fails; no classical (square-integrable) solution.
    #[error("beta - gamma = {diff} <= -1/2: kernel is not square integrable")]
    NotSquareIntegrable { diff: f64 },

    #[error("{what} diverges: {regime}")]
    Divergent {
        what: &'static str,
        regime: &'static str,
    },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("covariance factorization failed; minimum eigenvalue {min_eigenvalue:e}")]
    Factorization { min_eigenvalue: f64 },

    #[error("resource cap exceeded: {what} needs {requested}, limit {limit}")]
    ResourceCap {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(&'static str),

    #[error("malformed sampled path: {0}")]
    MalformedPath(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }

    /// True for failures of a numerical method (as opposed to rejected inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::Factorization { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_square_integrable(beta: f64, gamma: f64) -> Result<()> {
    let diff = beta - gamma;
    if diff <= -0.5 {
        Err(Error::NotSquareIntegrable { diff })
    } else {
        Ok(())
    }
}

pub(crate) fn check_order(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, value, "must lie in (0, 1]"))
    }
}
