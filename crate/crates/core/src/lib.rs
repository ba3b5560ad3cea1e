//! Hidden T-gate recompilation puzzles.
//!
//! A puzzle hides a bitstring `s*` in a circuit of partially random
//! unitaries; each bit decides whether a T gate sits inside a conjugated
//! layer. The crate builds such circuits, evaluates fidelity and parity
//! losses of candidate strings, runs discrete searches over them, and
//! characterizes the resulting landscapes and states.

mod bitstring;
pub mod cayley;
pub mod clifford;
pub mod diagnostics;
pub mod error;
pub mod gates;
pub mod hermitian;
pub mod landscape;
pub mod optimizer;
pub mod pauli;
pub mod puzzle;
pub mod qsvt;
pub mod rng;
pub mod rotation;
pub mod state;
pub mod stats;

pub use bitstring::Bitstring;

pub use cayley::{cayley_apply, dense_cayley, CayleyBackend, CayleyOperator, DenseUnitary, SolverOptions};
pub use error::{Error, Result};
pub use gates::Gate;
pub use hermitian::{HermitianOperator, PauliSum, RandomHermitian};
pub use pauli::{Pauli, PauliString, Phase};
pub use state::{reduced_density, DensityMatrix, Statevector};
pub use landscape::LossMap;
pub use optimizer::{OptTrace, Termination};
pub use puzzle::{build_instance, InstanceParams, LossKind, NoisyLossModel, Puzzle, PuzzleInstance};
pub use rotation::{build_rotation_instance, RotationInstance, RotationParams};
