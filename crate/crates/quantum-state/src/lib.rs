//! Pure quantum states over named qubits and Fock modes.
//!
//! A [`JointState`] stores a sparse amplitude map over basis vectors of a
//! [`SystemLayout`]. Modes are truncated at the layout's photon budget, which
//! is exact as long as every operation conserves photon number.

mod density;
mod error;
mod layout;
mod state;

pub use density::{mixture_density_matrix, DensityMatrix};
pub use error::StateError;
pub use layout::{BasisVector, Slot, SlotKind, SystemLayout};
pub use state::JointState;

pub use num_complex::Complex64;

/// Amplitudes with modulus below this are dropped after every operation.
pub const PRUNE_EPS: f64 = 1e-12;
/// Tolerance for normalization and unitarity checks.
pub const NORM_TOL: f64 = 1e-9;

pub type Result<T> = std::result::Result<T, StateError>;
