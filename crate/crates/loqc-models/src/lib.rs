//! The LOQC CNOT corpus: process sources, builders, input environments,
//! mutants and the CNOT output probe.

mod corpus;
mod input;
mod probe;

pub use corpus::{build, mutant, ModelId, Mutant};
pub use input::{environment_for, InputStateSpec};
pub use probe::{cnot_output, cnot_roles, role_amplitudes, CnotRoles, ProbeResult};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("input amplitudes are not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("no configuration matches the CNOT output probe")]
    ProbeNotFound,
    #[error(transparent)]
    Semantics(#[from] semantics::SemanticsError),
}
