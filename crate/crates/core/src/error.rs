use thiserror::Error;

use crate::paths::QuadratureResult;
use crate::quat::Quaternion;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("pole: evaluation at the phrase center {0}")]
    Pole(Quaternion),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("singular linear system near a branch degeneracy at {0}")]
    BranchDegenerate(Quaternion),
    #[error("path passes through the singular point {0}")]
    OnPath(Quaternion),
    #[error("no convergence within {levels} refinements (last delta {delta:e})")]
    NoConvergence {
        levels: usize,
        delta: f64,
        best: Box<QuadratureResult>,
    },
    #[error("refinement budget exhausted: {0}")]
    Budget(String),
    #[error("convergence radius violated: evaluation radius {radius} must stay below {limit}")]
    ConvergenceRadius { radius: f64, limit: f64 },
    #[error("point {0} lies outside the admissible region: {1}")]
    Outside(Quaternion, String),
    #[error("configuration leaves the plane of the circle: {0}")]
    OffSlice(String),
    #[error("root search failed; best |P| = {residual:e} at {best}")]
    RootNotFound { best: Quaternion, residual: f64 },
}

impl Error {
    /// True for failures of numerical procedures, as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. }
                | Error::Budget(_)
                | Error::BranchDegenerate(_)
                | Error::RootNotFound { .. }
                | Error::Unsupported(_)
                | Error::ConvergenceRadius { .. }
        )
    }
}
