use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("good index {good} out of range (instance has {m} goods)")]
    GoodOutOfRange { good: usize, m: usize },

    #[error("agent index {agent} out of range (instance has {n} agents)")]
    AgentOutOfRange { agent: usize, n: usize },

    #[error("good {0} appears twice in a bundle")]
    DuplicateGood(usize),

    #[error("good {0} is already in the bundle")]
    GoodInBundle(usize),

    #[error("allocation is partial: {0} goods unassigned")]
    PartialAllocation(usize),

    #[error("valuation {agent} covers {got} goods, expected {expected}")]
    ShapeMismatch {
        agent: usize,
        got: usize,
        expected: usize,
    },

    #[error("entry {value} at agent {agent}, good {good} is not binary")]
    NonBinaryEntry {
        agent: usize,
        good: usize,
        value: i64,
    },

    #[error("valuation of agent {agent} is not binary submodular: {detail}")]
    NotBinarySubmodular { agent: usize, detail: String },

    #[error("instance must have at least one agent")]
    NoAgents,

    #[error("operation requires binary additive valuations")]
    NotAdditive,

    #[error("instance is not normalised")]
    NotNormalised,

    #[error("instance is not doubly normalised")]
    NotDoublyNormalised,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("oracle budget exceeded: {needed} assignments needed, budget {budget}")]
    BudgetExceeded { needed: String, budget: u64 },

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
