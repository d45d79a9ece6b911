use thiserror::Error;

use crate::bagfill::BagFillFailure;
use crate::model::{Value, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid instance: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown agent {0}")]
    UnknownAgent(usize),
    #[error("unknown item {0}")]
    UnknownItem(usize),
    #[error("agent {0} has zero total value")]
    ZeroTotal(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AllocationError {
    #[error("allocation has {found} bundles, expected {expected}")]
    BundleCount { found: usize, expected: usize },
    #[error("item {0} does not exist")]
    UnknownItem(usize),
    #[error("item {0} appears in more than one bundle")]
    Duplicate(usize),
    #[error("item {0} is not allocated")]
    Missing(usize),
    #[error("allocation violates a category threshold")]
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("unknown agent {0}")]
    UnknownAgent(usize),
    #[error("cannot reduce the last agent")]
    LastAgent,
    #[error("bundle is not a feasible set of known items")]
    BadBundle,
    #[error("category {category} would keep {size} items, more than {capacity}")]
    Overfull { category: usize, size: usize, capacity: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BagFillError {
    #[error("bag filling needs at least one agent")]
    NoAgents,
    #[error("instance is not normalized (agent {0})")]
    NotNormalized(usize),
    #[error("instance is not ordered")]
    NotOrdered,
    #[error("alpha must be positive")]
    NonPositiveAlpha,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(Value),
    #[error("alpha infeasible: {0}")]
    Failed(BagFillFailure),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("node budget of {budget} exhausted")]
    BudgetExceeded { budget: u64 },
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
