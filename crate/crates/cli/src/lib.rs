//! Experiment harness around `capq-core`: scenario runs over the five
//! methods, benchmark-table reproduction, verification suites, and CSV
//! export. The `capq` binary is a thin wrapper over these modules.

pub mod reproduce;
pub mod scenario;
pub mod tables;
pub mod verify;

/// Process exit codes used by the `capq` binary.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    /// A reproduced cost cell deviates from the published value, or a
    /// verification suite failed.
    pub const DEVIATION: u8 = 1;
    pub const INVALID_INPUT: u8 = 2;
    pub const CAPACITY: u8 = 3;
    pub const NUMERICAL: u8 = 4;
}

/// Maps an error to the binary's exit code.
pub fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<capq_core::Error>() {
        Some(capq_core::Error::CapacityExceeded { .. }) => exit::CAPACITY,
        Some(capq_core::Error::NoConvergence { .. })
        | Some(capq_core::Error::IterationCapExceeded(_)) => exit::NUMERICAL,
        Some(_) => exit::INVALID_INPUT,
        // config parse failures, missing files, bad flags
        None => exit::INVALID_INPUT,
    }
}
