//! Operational semantics of CQP: configurations, single steps and
//! exploration of the labelled transition system.

mod config;
mod eval;
mod lts;
mod step;
mod value;

pub use config::{simplify, Component, Configuration, MixedConfig, ProbBranch, WEIGHT_EPS};
pub use eval::{eval, eval_all, run_action, Outcome, OwnershipChange};
pub use lts::{
    explore, explore_process, terminal_distributions, Distribution, Edge, Label, Limits, LtsGraph, Node,
    Observation,
};
pub use step::{step, EnvironmentSchedule};
pub use value::{is_lambda_var, lambda_var, Value};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error(transparent)]
    Expand(#[from] cqp_lang::ExpandError),
    #[error(transparent)]
    Optics(#[from] optics::OpticsError),
    #[error(transparent)]
    State(#[from] quantum_state::StateError),
    #[error("limit exceeded: {0}")]
    LimitExceeded(String),
    #[error("stuck: {0}")]
    Stuck(String),
    #[error("ownership violation at run time: {0}")]
    Ownership(String),
    #[error("post-selection retained no weight")]
    PostSelectionEmpty,
}

pub type Result<T> = std::result::Result<T, SemanticsError>;
