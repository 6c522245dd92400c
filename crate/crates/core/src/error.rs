use thiserror::Error;

/// Errors raised by the simulator and its estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("efficiency constraints violated: {}", .0.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "))]
    Constraint(Vec<crate::cylinder::ConstraintClause>),

    #[error("undefined estimate: {0}")]
    UndefinedEstimate(&'static str),

    #[error("sinusoid fit is rank deficient ({distinct} distinct phases, need at least 3)")]
    RankDeficient { distinct: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("empty series")]
    EmptySeries,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
