//! Probabilistic branching bisimilarity of CQP transition systems, with
//! counterexample traces and a congruence test harness.

mod bisim;
mod congruence;

pub use bisim::{check_pbb, check_pbb_with_partition, mu, Partition, Side, TraceStep, Verdict};
pub use congruence::{congruence_spot_check, hole, plug, HOLE};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquivalenceError {
    #[error(transparent)]
    Semantics(#[from] semantics::SemanticsError),
    #[error("context places the hole under an input")]
    InputContext,
    #[error("context places the hole under a qubit or number-state declaration")]
    DeclarationContext,
    #[error("context has no hole")]
    NoHole,
    #[error("context is not typable: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Untypable(Vec<cqp_lang::Diagnostic>),
}
