//! Linear-optical gates and measurements on [`JointState`]s.
//!
//! Beam splitters follow the creation-operator convention
//! `a† -> cosθ a† + sinθ b†`, `b† -> sinθ a† - cosθ b†` with `cos²θ = η` and no
//! extra phase. Dual-rail qubits are encoded `|0> -> |10>`, `|1> -> |01>`.

mod gates;
mod measure;

pub use gates::{
    beam_splitter, beam_splitter_matrix, biased_coin_matrix, biased_coin_unitary,
    dual_rail_cz, dual_rail_hadamard, ps_convert, qubit_cz_matrix, qubit_hadamard_matrix,
    rotation_splitter, rotation_splitter_matrix, BeamSplitterParams,
};
pub use measure::{
    measure_modes, measure_qubits, ps_measure_modes, ps_measure_unnormalized, MeasurementOutcome,
};

use quantum_state::StateError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("{0} is not a mode")]
    NotAMode(String),
    #[error("{0} is not a qubit")]
    NotAQubit(String),
    #[error("reflectivity {0} outside [0, 1]")]
    InvalidReflectivity(f64),
    #[error("pair ({0}, {1}) does not hold exactly one photon on the whole support")]
    DomainError(String, String),
    #[error("post-selection retained no weight")]
    PostSelectionEmpty,
}

pub type Result<T> = std::result::Result<T, OpticsError>;
