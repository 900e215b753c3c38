use alloc::string::String;

/// Everything that can go wrong inside the engine.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("jet order {order} exceeds the configured cap {cap}")]
    JetOrder { order: u32, cap: u8 },
    #[error("delta derivative order {order} exceeds the configured cap {cap}")]
    DeltaOrder { order: u32, cap: u8 },
    #[error("expression has {terms} terms, above the configured limit {limit}")]
    TermLimit { terms: usize, limit: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("expression is not homogeneous in the jet grading")]
    Inhomogeneous,
    #[error("malformed distribution term: {0}")]
    Malformed(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("coordinate change is not invertible: {0}")]
    NotInvertible(String),
    #[error("Gaussian coefficients require complex mode")]
    ComplexDisabled,
    #[error("unknown name: {0}")]
    Unknown(String),
    #[error("evaluation failed: {0}")]
    Evaluation(String),
    #[error("verification engines disagree: {0}")]
    Inconsistent(String),
}

pub type Result<T> = core::result::Result<T, Error>;

/// Resource bounds applied by every operation that can grow jet or δ orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub max_jet: u8,
    pub max_delta: u8,
    pub max_terms: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { max_jet: 6, max_delta: 8, max_terms: 200_000 }
    }
}

impl Caps {
    pub(crate) fn check_delta(&self, order: u32) -> Result<()> {
        if order > self.max_delta as u32 {
            Err(Error::DeltaOrder { order, cap: self.max_delta })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_terms(&self, terms: usize) -> Result<()> {
        if terms > self.max_terms {
            Err(Error::TermLimit { terms, limit: self.max_terms })
        } else {
            Ok(())
        }
    }
}
