use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The mixed-radix state space does not fit in the platform index type.
    #[error("state space capacity exceeded: {states} states for K={horizon}, A={max_arrivals}")]
    CapacityExceeded {
        states: u128,
        horizon: u32,
        max_arrivals: u32,
    },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Policy evaluation stopped before meeting the residual contract.
    #[error("policy evaluation did not converge: residual {residual:e} after {sweeps} sweeps")]
    NoConvergence { residual: f64, sweeps: u64 },

    /// Policy iteration ran past its cap; indicates a tie-breaking bug.
    #[error("policy iteration exceeded {0} iterations")]
    IterationCapExceeded(u32),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
