use thiserror::Error;

/// Which second-round branch a posterior refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Accept,
    Reject,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Accept => f.write_str("accept"),
            Branch::Reject => f.write_str("reject"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("distribution is not regular: second difference {worst:e} at p={at}")]
    NotRegular { worst: f64, at: f64 },
    #[error("invalid distribution table: {0}")]
    InvalidTable(String),
    #[error("zero-probability conditioning event on the {0} branch")]
    DegeneratePosterior(Branch),
    #[error("threshold t={t} has no sophisticated-focused implementation at mu={mu} (margin {margin:e})")]
    NotImplementable { mu: f64, t: f64, margin: f64 },
    #[error("closed form inconsistent: {0}")]
    Inconsistent(String),
    #[error("formula used outside its branch: {0}")]
    OutOfBranch(String),
    #[error("unreachable belief state: {0}")]
    UnreachableState(String),
    #[error("unsupported profile: {0}")]
    UnsupportedProfile(String),
    #[error("internal solver failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
