//! Exact feasibility checks, implementations and optimization for reduced
//! forms of single- and multi-item auctions.

pub mod caratheodory;
pub mod error;
pub mod feasibility;
pub mod fixtures;
pub mod genborder;
pub mod hierarchy;
pub mod lp;
pub mod model;
pub mod optimal;
pub mod oracle;
pub mod par;
pub mod rational;

pub use error::{CaratheodoryError, Error, LpError, Result};
pub use feasibility::{
    check_feasible, check_feasible_iid, check_feasible_multi, virtual_pi, Certificate,
    FeasibilityVerdict, VirtualReducedForm,
};
pub use model::{
    validate, Bidder, BidderModel, HierarchicalMechanism, Hyperplane, JointDistribution,
    MechanismDistribution, Rank, ReducedForm, SymmetricReducedForm, ValidationIssue,
    WeightedMechanism,
};
pub use par::Execution;
pub use rational::{format_rational, parse_rational, Rational};
