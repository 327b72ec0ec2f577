use rand::seq::index::sample;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::paulisim::{Circuit, Hamiltonian, Pauli, PauliString};
use crate::seed::rng_from_seed;

pub const QAOA_MAX_QUBITS: usize = 8;

/// Number of Z-strings of weight 1..=3 on `n` qubits.
fn available_strings(n: usize) -> usize {
    (1..=3.min(n)).map(|w| binomial(n, w)).sum()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Single-layer QAOA on a seeded random cost Hamiltonian.
///
/// `H_C` has `min(2n, #available)` distinct Z-strings of weight 1 to 3 with
/// coefficients uniform in [−1, 1]. The circuit is `H` on every qubit, then
/// `e^{−iγ H_C}` as one Z-string rotation per term (angle `−2 c_α γ`, all on
/// parameter 0), then the mixer `Π_j e^{−iβ X_j / 2}` (angle `−β`, parameter 1).
/// Every rotation carries its noise channel; the loss observable is `H_C`.
pub fn build_qaoa_toy(n: usize, seed: u64) -> Result<(Circuit, Hamiltonian)> {
    if n == 0 || n > QAOA_MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "qaoa toy supports 1..={QAOA_MAX_QUBITS} qubits, got {n}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let count = (2 * n).min(available_strings(n));
    let mut masks: Vec<u64> = Vec::with_capacity(count);
    while masks.len() < count {
        let weight = rng.random_range(1..=3.min(n));
        let mask = sample(&mut rng, n, weight)
            .into_iter()
            .fold(0u64, |acc, q| acc | 1 << q);
        if !masks.contains(&mask) {
            masks.push(mask);
        }
    }
    let mut terms = Vec::with_capacity(count);
    for mask in masks {
        terms.push((
            rng.random_range(-1.0..=1.0),
            PauliString::new(n, 0, mask, 0)?,
        ));
    }
    let cost = Hamiltonian::new(n, terms)?;

    let mut bld = Circuit::builder(n);
    for q in 0..n {
        bld = bld.h(q)?;
    }
    for (c, p) in cost.terms() {
        bld = bld.rotation_scaled(*p, 0, -2.0 * c);
    }
    for q in 0..n {
        bld = bld.rotation_scaled(PauliString::single(n, q, Pauli::X)?, 1, -1.0);
    }
    Ok((bld.build()?, cost))
}
