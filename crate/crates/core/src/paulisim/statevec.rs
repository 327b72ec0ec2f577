//! Pure-state evolution. Noise-free evaluations (μ = 0) take this path; it is
//! exactly the density-matrix evolution restricted to rank-one states.

use num_complex::Complex64;

use super::gates::{CliffordGate, CliffordKind};
use super::kernel::{C, ZERO};
use super::pauli::{Hamiltonian, PauliString};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(n: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = C::new(1.0, 0.0);
        Self { n, amps }
    }

    pub fn apply_clifford(&mut self, g: &CliffordGate) {
        if g.kind() == CliffordKind::H {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let bit = 1usize << g.targets()[0];
            for k in (0..self.amps.len()).filter(|k| k & bit == 0) {
                let a = self.amps[k];
                let b = self.amps[k | bit];
                self.amps[k] = (a + b) * h;
                self.amps[k | bit] = (a - b) * h;
            }
        } else {
            let old = self.amps.clone();
            for (k, &a) in old.iter().enumerate() {
                let (w, j) = g.monomial(k).expect("monomial gate");
                self.amps[j] = w * a;
            }
        }
    }

    /// `|ψ⟩ ← P|ψ⟩`.
    pub fn apply_pauli(&mut self, p: &PauliString) {
        let old = self.amps.clone();
        for (k, &a) in old.iter().enumerate() {
            let (f, j) = p.apply_to_basis(k);
            self.amps[j] = f * a;
        }
    }

    /// `|ψ⟩ ← (cos(θ/2) I + i sin(θ/2) P)|ψ⟩`.
    pub fn apply_rotation(&mut self, p: &PauliString, angle: f64) {
        let (s, c) = (angle / 2.0).sin_cos();
        let is = C::new(0.0, s);
        let old = self.amps.clone();
        for a in &mut self.amps {
            *a *= c;
        }
        for (k, &a) in old.iter().enumerate() {
            let (f, j) = p.apply_to_basis(k);
            self.amps[j] += is * f * a;
        }
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `H|ψ⟩`.
    pub fn apply_hamiltonian(&self, h: &Hamiltonian) -> StateVector {
        let mut out = vec![ZERO; self.amps.len()];
        for (coef, p) in h.terms() {
            for (k, &a) in self.amps.iter().enumerate() {
                let (f, j) = p.apply_to_basis(k);
                out[j] += f * a * *coef;
            }
        }
        StateVector {
            n: self.n,
            amps: out,
        }
    }

    pub fn expectation(&self, h: &Hamiltonian) -> f64 {
        self.inner(&self.apply_hamiltonian(h)).re
    }
}
