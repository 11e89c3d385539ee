use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("matrix is not symmetric: max |m - m^T| = {max_deviation:e}")]
    Asymmetric { max_deviation: f64 },

    #[error("covariance violates the uncertainty relation: min eigenvalue of sigma + i/2 Omega = {residual:e}")]
    Unphysical { residual: f64 },

    #[error("singular linear system: smallest pivot {pivot:e}")]
    Singular { pivot: f64 },

    #[error("matrix norm {norm:e} exceeds the exponential limit {limit:e}")]
    NormTooLarge { norm: f64, limit: f64 },

    #[error("drift matrix has an eigenvalue with non-negative real part; no steady state")]
    UnstableDrift,

    #[error("symplectic discriminant is negative ({residual:e}); input is not a physical state")]
    SpectrumInconsistent { residual: f64 },

    #[error("smallest partially transposed symplectic eigenvalue is zero; log-negativity diverges")]
    InfiniteNegativity,

    #[error("integration would take {steps} steps (limit {limit})")]
    TooManySteps { steps: f64, limit: f64 },

    #[error("initial state is not entangled (S = {simon:e} >= 0)")]
    NotEntangled { simon: f64 },

    #[error("invalid time grid: {reason}")]
    InvalidGrid { reason: &'static str },
}
