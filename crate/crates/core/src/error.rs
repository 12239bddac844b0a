use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the model.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("length mismatch for {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    /// The level search failed to bracket or narrow the root. Only numeric
    /// trouble (overflow, NaN gains) can trigger this.
    #[error("computation-level search did not converge for target {target} bits after {iterations} iterations")]
    Convergence { target: f64, iterations: usize },

    #[error("infeasible {scheme} plan (seed {seed}, stream {stream}): {detail}")]
    Infeasible {
        scheme: String,
        seed: u64,
        stream: u64,
        detail: String,
    },

    #[error("policy bug at slot {slot}: {detail}")]
    Policy { slot: usize, detail: String },

    #[error("grid oracle is limited to at most 3 slots, got {0}")]
    OracleTooLarge(usize),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
