//! Discretized 1D Hilbert space: grids, wavepackets, operators,
//! expectation values and split-operator time evolution.

pub mod evolution;
pub mod grid;
pub mod operator;
pub mod oracle;
pub mod state;

pub use evolution::{evolve, evolve_free, Hamiltonian, Potential, SplitOperator};
pub use grid::Grid;
pub use operator::{expectation, matrix_element, LinearOperator, OperatorKind};
pub use oracle::{dense_hamiltonian, dense_operator, dense_oracle, ExactPropagator, OracleInput};
pub use state::{bump_packet, gaussian_packet, superpose, Envelope, WaveFunction};
