//! Dense density-matrix states and the channels the protocol needs.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use super::gates::{CliffordGate, CliffordKind};
use super::kernel::{self, C, ZERO};
use super::pauli::{Hamiltonian, PauliString};
use crate::error::{check_mu, Error, Result};
use crate::seed::Rng;

/// Largest register simulated densely (4^12 complex entries).
pub const MAX_DENSE_QUBITS: usize = 12;

pub const TRACE_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;

/// A `2^n × 2^n` Hermitian, unit-trace, positive semidefinite matrix stored
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    fn check_size(n: usize) -> Result<()> {
        if n > MAX_DENSE_QUBITS {
            return Err(Error::InvalidArgument(format!(
                "{n} qubits exceeds the dense limit of {MAX_DENSE_QUBITS}"
            )));
        }
        Ok(())
    }

    /// `|0…0⟩⟨0…0|`.
    pub fn zero_state(n: usize) -> Result<Self> {
        Self::basis_state(n, 0)
    }

    /// `|k⟩⟨k|` for computational basis index `k`.
    pub fn basis_state(n: usize, index: usize) -> Result<Self> {
        Self::check_size(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n} qubits"
            )));
        }
        let mut data = vec![ZERO; dim * dim];
        data[index * dim + index] = C::new(1.0, 0.0);
        Ok(Self { n, data })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        Self::check_size(n)?;
        let dim = 1usize << n;
        let mut data = vec![ZERO; dim * dim];
        for k in 0..dim {
            data[k * dim + k] = C::new(1.0 / dim as f64, 0.0);
        }
        Ok(Self { n, data })
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn from_pure(amps: &[Complex64]) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() || dim < 2 {
            return Err(Error::InvalidArgument(format!(
                "state length {dim} is not a power of two"
            )));
        }
        let n = dim.trailing_zeros() as usize;
        Self::check_size(n)?;
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidArgument(format!("state norm² {norm} != 1")));
        }
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                data[r * dim + c] = amps[r] * amps[c].conj();
            }
        }
        Ok(Self { n, data })
    }

    /// Validates trace, Hermiticity and positivity.
    pub fn from_entries(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        Self::check_size(n)?;
        if entries.len() != 1 << (2 * n) {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries, got {}",
                1usize << (2 * n),
                entries.len()
            )));
        }
        let rho = Self { n, data: entries };
        rho.check_invariants()?;
        Ok(rho)
    }

    /// Full-rank random state `G G† / Tr(G G†)` with Gaussian `G`.
    pub fn random(n: usize, rng: &mut Rng) -> Result<Self> {
        Self::check_size(n)?;
        let dim = 1usize << n;
        let g: Vec<C> = (0..dim * dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C::new(re, im)
            })
            .collect();
        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for c in r..dim {
                let mut acc = ZERO;
                for k in 0..dim {
                    acc += g[r * dim + k] * g[c * dim + k].conj();
                }
                data[r * dim + c] = acc;
                data[c * dim + r] = acc.conj();
            }
        }
        let tr: f64 = (0..dim).map(|k| data[k * dim + k].re).sum();
        for v in &mut data {
            *v /= tr;
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|k| self.data[k * dim + k]).sum()
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let dim = self.dim();
        let m = DMatrix::from_row_slice(dim, dim, &self.data);
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_invariants(&self) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::CorruptedState(format!("trace {tr}")));
        }
        let dim = self.dim();
        for r in 0..dim {
            for c in r..dim {
                if (self.data[r * dim + c] - self.data[c * dim + r].conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::CorruptedState(format!(
                        "not hermitian at ({r}, {c})"
                    )));
                }
            }
        }
        let lmin = self.min_eigenvalue();
        if lmin < -PSD_TOL {
            return Err(Error::CorruptedState(format!("eigenvalue {lmin} < 0")));
        }
        Ok(())
    }

    fn check_pauli(&self, p: &PauliString) -> Result<()> {
        if p.n() != self.n {
            return Err(Error::QubitMismatch(self.n, p.n()));
        }
        if !p.is_hermitian() {
            return Err(Error::NonHermitian(p.to_string()));
        }
        Ok(())
    }

    /// `ρ ← G ρ G†`.
    pub fn apply_clifford(&mut self, g: &CliffordGate) -> Result<()> {
        g.check_register(self.n)?;
        conj_clifford(&mut self.data, self.n, g);
        Ok(())
    }

    /// `ρ ← U ρ U†` with `U = cos(φ/2) I + i sin(φ/2) P`.
    pub fn apply_rotation(&mut self, p: &PauliString, phi: f64) -> Result<()> {
        self.check_pauli(p)?;
        if !phi.is_finite() {
            return Err(Error::NonFinite("rotation angle"));
        }
        kernel::rotate(&mut self.data, self.n, p, phi);
        Ok(())
    }

    /// Pauli channel with Kraus operators `{√(1−μ/2) I, √(μ/2) P}`.
    pub fn apply_noise(&mut self, p: &PauliString, mu: f64) -> Result<()> {
        self.check_pauli(p)?;
        check_mu(mu)?;
        kernel::pauli_mix(&mut self.data, self.n, p, mu / 2.0);
        Ok(())
    }

    /// The same channel realized by an ancilla prepared in `R_X(θ)|0⟩`, a
    /// controlled-`P` and a partial trace. Equals `apply_noise` with
    /// `μ = 2 sin²(θ/2)`; `θ = π` gives `ρ ↦ PρP`.
    pub fn apply_noise_dilated(&self, p: &PauliString, theta: f64) -> Result<DensityMatrix> {
        self.check_pauli(p)?;
        if !theta.is_finite() {
            return Err(Error::NonFinite("dilation angle"));
        }
        let n = self.n;
        Self::check_size(n + 1)?;
        let dim = self.dim();
        let big_dim = dim << 1;
        let anc = 1usize << n;

        // |0⟩⟨0| ⊗ ρ with the ancilla as the most significant qubit
        let mut big = vec![ZERO; big_dim * big_dim];
        for r in 0..dim {
            big[r * big_dim..r * big_dim + dim].copy_from_slice(&self.data[r * dim..(r + 1) * dim]);
        }

        let (s, c) = (theta / 2.0).sin_cos();
        let rx = [
            [C::new(c, 0.0), C::new(0.0, -s)],
            [C::new(0.0, -s), C::new(c, 0.0)],
        ];
        kernel::conj_one_qubit(&mut big, n + 1, n, rx);

        kernel::conj_monomial(&mut big, n + 1, |k| {
            if k & anc == 0 {
                (C::new(1.0, 0.0), k)
            } else {
                let (f, j) = p.apply_to_basis(k & !anc);
                (f, j | anc)
            }
        });

        let mut data = vec![ZERO; dim * dim];
        for r in 0..dim {
            for col in 0..dim {
                data[r * dim + col] =
                    big[r * big_dim + col] + big[(r | anc) * big_dim + (col | anc)];
            }
        }
        Ok(DensityMatrix { n, data })
    }

    /// `Σ_α c_α Tr(ρ H_α)`.
    pub fn expectation(&self, h: &Hamiltonian) -> Result<f64> {
        if h.n() != self.n {
            return Err(Error::QubitMismatch(self.n, h.n()));
        }
        let mut acc = ZERO;
        let mut scale = 0.0;
        for (coef, p) in h.terms() {
            acc += kernel::trace_pauli(&self.data, self.n, p) * *coef;
            scale += coef.abs();
        }
        if acc.im.abs() > TRACE_TOL * scale.max(1.0) {
            return Err(Error::CorruptedState(format!(
                "expectation has imaginary part {}",
                acc.im
            )));
        }
        Ok(acc.re)
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }
}

/// `ρ ← G ρ G†` on a raw buffer.
pub(crate) fn conj_clifford(buf: &mut [C], n: usize, g: &CliffordGate) {
    if g.kind() == CliffordKind::H {
        kernel::conj_one_qubit(buf, n, g.targets()[0], CliffordGate::hadamard_matrix());
    } else {
        kernel::conj_monomial(buf, n, |k| g.monomial(k).expect("monomial gate"));
    }
}
