//! Random circuits and observables for tests, audits and benchmarks.

use rand::Rng as _;

use super::circuit::{Circuit, CircuitOp};
use super::gates::{CliffordGate, CliffordKind};
use super::pauli::{Hamiltonian, PauliString};
use crate::error::{Error, Result};
use crate::seed::Rng;

const SINGLE: [CliffordKind; 6] = [
    CliffordKind::H,
    CliffordKind::S,
    CliffordKind::Sdg,
    CliffordKind::X,
    CliffordKind::Y,
    CliffordKind::Z,
];
const DOUBLE: [CliffordKind; 3] = [CliffordKind::Cx, CliffordKind::Cz, CliffordKind::Swap];

/// A non-identity Hermitian Pauli string drawn uniformly.
pub fn random_pauli(n: usize, rng: &mut Rng) -> Result<PauliString> {
    if n == 0 {
        return Err(Error::InvalidArgument("pauli on zero qubits".into()));
    }
    let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    loop {
        let x = rng.random::<u64>() & mask;
        let z = rng.random::<u64>() & mask;
        if x | z != 0 {
            return PauliString::new(n, x, z, 0);
        }
    }
}

pub fn random_clifford(n: usize, rng: &mut Rng) -> Result<CliffordGate> {
    if n >= 2 && rng.random_bool(0.4) {
        let kind = DOUBLE[rng.random_range(0..DOUBLE.len())];
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        CliffordGate::new(kind, &[a, b])
    } else {
        let kind = SINGLE[rng.random_range(0..SINGLE.len())];
        CliffordGate::new(kind, &[rng.random_range(0..n)])
    }
}

/// Noisy circuit with one rotation per parameter, in parameter order, each
/// preceded by up to two random Cliffords and followed by its channel.
pub fn random_circuit(n: usize, m: usize, rng: &mut Rng) -> Result<Circuit> {
    let mut ops = Vec::new();
    for k in 0..m {
        for _ in 0..rng.random_range(0..=2) {
            ops.push(CircuitOp::Clifford(random_clifford(n, rng)?));
        }
        let pauli = random_pauli(n, rng)?;
        ops.push(CircuitOp::Rotation {
            pauli,
            param: k,
            scale: 1.0,
        });
        ops.push(CircuitOp::Noise { pauli });
    }
    for _ in 0..rng.random_range(0..=2) {
        ops.push(CircuitOp::Clifford(random_clifford(n, rng)?));
    }
    Circuit::new(n, m, ops)
}

/// Observable with `terms` random Pauli terms and coefficients in [−1, 1].
pub fn random_hamiltonian(n: usize, terms: usize, rng: &mut Rng) -> Result<Hamiltonian> {
    let mut out = Vec::with_capacity(terms);
    for _ in 0..terms {
        out.push((rng.random_range(-1.0..=1.0), random_pauli(n, rng)?));
    }
    Hamiltonian::new(n, out)
}
