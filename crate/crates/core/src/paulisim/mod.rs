//! Density-matrix simulation of Clifford + Pauli-rotation circuits with
//! Pauli noise channels attached to every rotation.

mod circuit;
mod density;
mod gates;
mod io;
mod kernel;
mod pauli;
pub mod random;
mod statevec;

pub use circuit::{Circuit, CircuitBuilder, CircuitOp};
pub use density::{DensityMatrix, HERMITIAN_TOL, MAX_DENSE_QUBITS, PSD_TOL, TRACE_TOL};
pub use gates::{CliffordGate, CliffordKind};
pub use io::{CircuitFile, PAULI_ORDER};
pub use pauli::{Hamiltonian, Pauli, PauliString, MAX_QUBITS};
