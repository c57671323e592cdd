use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not symplectic: violation {violation:.3e} exceeds {tolerance:.3e}")]
    NotSymplectic { violation: f64, tolerance: f64 },

    #[error("symplectic conditions disagree (WᵀσW {ccr:.3e}, block-transpose {cond2:.3e}, block {cond3:.3e})")]
    InconsistentConditions { ccr: f64, cond2: f64, cond3: f64 },

    #[error("invalid pairing: {0}")]
    InvalidPairing(String),

    #[error("overlap has no closed form: {0}")]
    NotRepresentable(String),

    #[error("state is delta-supported (rank {rank} < {q}); pair it against a test function instead")]
    DeltaSupported { rank: usize, q: usize },

    #[error("numerical tolerance not met: achieved {achieved:.3e}, requested {requested:.3e}")]
    NonConvergence { achieved: f64, requested: f64 },

    #[error("internal inconsistency: {0}")]
    Internal(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
