use thiserror::Error;

use crate::feasibility::FeasibilityVerdict;
use crate::model::ValidationIssue;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("lazy constraint generation exceeded the cap of {0} rounds")]
    IterationCap(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaratheodoryError {
    #[error("point is not inside the polytope")]
    NotInPolytope,
    #[error("ray endpoints coincide")]
    DegenerateRay,
    #[error("polytope oracles disagree: {0}")]
    OracleInconsistency(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid instance: {}", .0.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<ValidationIssue>),
    #[error("bidders are not marked i.i.d.")]
    NotIid,
    #[error("reduced form is not bidder-symmetric")]
    NotSymmetric,
    #[error("bidders are correlated; a product distribution is required")]
    CorrelatedModel,
    #[error("demand constraints are present; use the generalized feasibility check")]
    DemandConstraintsPresent,
    #[error("an explicit joint distribution is required")]
    JointMissing,
    #[error("demand constraints are required")]
    DemandsMissing,
    #[error("item index {0} out of range")]
    ItemOutOfRange(usize),
    #[error("bidder {bidder} has two types with equal interim probability after merging")]
    NotMerged { bidder: usize },
    #[error("bidder {bidder} type {ty} has zero probability; decomposition needs positive type probabilities")]
    ZeroProbabilityType { bidder: usize, ty: usize },
    #[error("reduced form is infeasible")]
    InfeasibleReducedForm(Box<FeasibilityVerdict>),
    #[error("bidder {bidder} reported an unknown type {ty}")]
    UnknownType { bidder: usize, ty: usize },
    #[error("profile has {got} entries but the model has {expected} bidders")]
    ProfileLength { expected: usize, got: usize },
    #[error(
        "target exceeds the implemented probability at item {item}, bidder {bidder}, type {ty}"
    )]
    TargetExceedsImplemented {
        item: usize,
        bidder: usize,
        ty: usize,
    },
    #[error("allocation variable for bidder {bidder}, item {item} is unbounded by the feasibility system")]
    UnboundedSystem { bidder: usize, item: usize },
    #[error("instance too large for exhaustive methods: {0}")]
    InstanceTooLarge(String),
    #[error("recomposed reduced form does not match the input")]
    RecompositionMismatch,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Caratheodory(#[from] CaratheodoryError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
