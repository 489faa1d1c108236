use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed instance document: {0}")]
    Parse(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("structurally infeasible group {group}: lower bound {lower} exceeds min(upper, |P|) = {cap}")]
    StructurallyInfeasibleGroup {
        group: usize,
        lower: usize,
        cap: usize,
    },

    #[error("invalid committee: {0}")]
    InvalidCommittee(String),

    #[error("rule {rule} requires complete preference lists (voter {voter} lists {len} of {m})")]
    IncompletePreferences {
        rule: &'static str,
        voter: usize,
        len: usize,
        m: usize,
    },

    #[error("{0}")]
    Unsupported(String),

    #[error("instance is infeasible: {0}")]
    Infeasible(String),

    #[error("feasibility unknown: {0}")]
    FeasibilityUnknown(String),

    #[error("no perfect b-matching exists")]
    NoPerfectMatching,

    #[error("enumeration cap exceeded: C({m},{k}) = {count} > {cap}")]
    CapExceeded {
        m: usize,
        k: usize,
        count: u128,
        cap: u128,
    },

    #[error("polytope is empty")]
    EmptyPolytope,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
