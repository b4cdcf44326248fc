use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("state is not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("eigensolver failed to converge for eigenvalue {index} after {iterations} iterations")]
    Eigensolver { index: usize, iterations: usize },

    #[error("stepper would need {steps} steps, above the limit of {limit}")]
    StepLimit { steps: u128, limit: u128 },

    #[error("truncation did not converge below N = {cap} (last tested N = {last}, deviation {deviation:e})")]
    TruncationNotConverged { cap: usize, last: usize, deviation: f64 },

    #[error("infeasible geometry{}: coupling {coupling_per_mm} /mm is not below the prefactor {prefactor_per_mm} /mm", bond_label(*.bond))]
    InfeasibleSpacing { bond: Option<usize>, coupling_per_mm: f64, prefactor_per_mm: f64 },

    #[error("index gradient {from_geometry_per_mm} /mm does not match requested {requested_per_mm} /mm")]
    OmegaMismatch { from_geometry_per_mm: f64, requested_per_mm: f64 },

    #[error("oracle not applicable: {0}")]
    OracleNotApplicable(String),
}

fn bond_label(bond: Option<usize>) -> String {
    bond.map(|n| format!(" at bond {n}")).unwrap_or_default()
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
