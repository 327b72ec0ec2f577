//! Clifford + Pauli-rotation circuits with the injected noise channels.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::density::{conj_clifford, DensityMatrix, MAX_DENSE_QUBITS};
use super::gates::{CliffordGate, CliffordKind};
use super::kernel;
use super::pauli::{Hamiltonian, PauliString};
use super::statevec::StateVector;
use crate::error::{check_finite, check_mu, Error, Result};

/// Stored intermediate states for the density-matrix adjoint gradient are
/// capped at this many bytes; above it the gradient falls back to shifts.
const ADJOINT_MEMORY_BUDGET: usize = 512 << 20;

#[derive(Debug, Clone, PartialEq)]
pub enum CircuitOp {
    Clifford(CliffordGate),
    /// `exp(i θ P / 2)` with `θ = scale · φ[param]`.
    Rotation {
        pauli: PauliString,
        param: usize,
        scale: f64,
    },
    /// `E_P(μ)` attached to the preceding rotation; μ is supplied at run time.
    Noise {
        pauli: PauliString,
    },
}

/// An ordered gate list over `n` qubits and `m` parameters.
///
/// Either every rotation is immediately followed by the noise channel on its
/// own Pauli, or the circuit carries no channels at all (a bare circuit,
/// noiseless at every μ).
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n: usize,
    m: usize,
    ops: Vec<CircuitOp>,
    noisy: bool,
}

impl Circuit {
    pub fn new(n: usize, m: usize, ops: Vec<CircuitOp>) -> Result<Self> {
        if n == 0 || n > MAX_DENSE_QUBITS {
            return Err(Error::InvalidCircuit(format!(
                "qubit count {n} outside 1..={MAX_DENSE_QUBITS}"
            )));
        }
        let mut seen = vec![false; m];
        let mut rotations = 0usize;
        let mut channels = 0usize;
        for (i, op) in ops.iter().enumerate() {
            match op {
                CircuitOp::Clifford(g) => g.check_register(n)?,
                CircuitOp::Rotation {
                    pauli,
                    param,
                    scale,
                } => {
                    check_pauli(pauli, n)?;
                    if *param >= m {
                        return Err(Error::InvalidCircuit(format!(
                            "op {i}: param_index {param} >= m = {m}"
                        )));
                    }
                    if !scale.is_finite() || *scale == 0.0 {
                        return Err(Error::InvalidCircuit(format!("op {i}: bad scale {scale}")));
                    }
                    seen[*param] = true;
                    rotations += 1;
                }
                CircuitOp::Noise { pauli } => {
                    check_pauli(pauli, n)?;
                    let attached = matches!(
                        i.checked_sub(1).map(|j| &ops[j]),
                        Some(CircuitOp::Rotation { pauli: rp, .. }) if rp.unsigned() == pauli.unsigned()
                    );
                    if !attached {
                        return Err(Error::InvalidCircuit(format!(
                            "op {i}: noise channel {pauli} does not follow a rotation on the same pauli"
                        )));
                    }
                    channels += 1;
                }
            }
        }
        if channels != 0 && channels != rotations {
            return Err(Error::InvalidCircuit(format!(
                "{rotations} rotations but {channels} noise channels; each rotation needs exactly one"
            )));
        }
        if let Some(k) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidCircuit(format!(
                "parameter {k} is never used"
            )));
        }
        Ok(Self {
            n,
            m,
            ops,
            noisy: channels > 0,
        })
    }

    pub fn builder(n: usize) -> CircuitBuilder {
        CircuitBuilder {
            n,
            ops: Vec::new(),
            with_noise: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_params(&self) -> usize {
        self.m
    }

    pub fn ops(&self) -> &[CircuitOp] {
        &self.ops
    }

    pub fn is_noisy(&self) -> bool {
        self.noisy
    }

    /// `(param, scale)` for every rotation, in circuit order.
    pub fn positions(&self) -> Vec<(usize, f64)> {
        self.ops
            .iter()
            .filter_map(|op| match op {
                CircuitOp::Rotation { param, scale, .. } => Some((*param, *scale)),
                _ => None,
            })
            .collect()
    }

    pub fn num_positions(&self) -> usize {
        self.positions().len()
    }

    /// True when each parameter drives exactly one rotation with `|scale| = 1`,
    /// so every parameter carries frequencies in {−1, 0, 1} only.
    pub fn has_unit_frequencies(&self) -> bool {
        self.first_non_unit_param().is_none()
    }

    pub(crate) fn first_non_unit_param(&self) -> Option<usize> {
        let mut count = vec![0usize; self.m];
        for (param, scale) in self.positions() {
            count[param] += 1;
            if scale.abs() != 1.0 {
                return Some(param);
            }
        }
        count.iter().position(|&c| c != 1)
    }

    /// Same gates with every rotation on its own unit-scale parameter. The
    /// expanded circuit evaluated at [`Circuit::angles`] equals the original.
    pub fn expand_positions(&self) -> Circuit {
        let mut next = 0;
        let ops = self
            .ops
            .iter()
            .map(|op| match op {
                CircuitOp::Rotation { pauli, .. } => {
                    next += 1;
                    CircuitOp::Rotation {
                        pauli: *pauli,
                        param: next - 1,
                        scale: 1.0,
                    }
                }
                other => other.clone(),
            })
            .collect();
        Circuit {
            n: self.n,
            m: next,
            ops,
            noisy: self.noisy,
        }
    }

    /// Copy with all noise channels removed.
    pub fn strip_noise(&self) -> Circuit {
        Circuit {
            n: self.n,
            m: self.m,
            ops: self
                .ops
                .iter()
                .filter(|op| !matches!(op, CircuitOp::Noise { .. }))
                .cloned()
                .collect(),
            noisy: false,
        }
    }

    /// Per-rotation angles `scale · φ[param]`.
    pub fn angles(&self, phi: &[f64]) -> Result<Vec<f64>> {
        if phi.len() != self.m {
            return Err(Error::ParamLength {
                expected: self.m,
                got: phi.len(),
            });
        }
        check_finite(phi, "circuit parameter")?;
        Ok(self
            .positions()
            .into_iter()
            .map(|(p, s)| s * phi[p])
            .collect())
    }

    /// Noisy state from `|0…0⟩`.
    pub fn run(&self, phi: &[f64], mu: f64) -> Result<DensityMatrix> {
        self.run_from(DensityMatrix::zero_state(self.n)?, phi, mu)
    }

    pub fn run_from(&self, mut rho: DensityMatrix, phi: &[f64], mu: f64) -> Result<DensityMatrix> {
        if rho.n() != self.n {
            return Err(Error::QubitMismatch(self.n, rho.n()));
        }
        check_mu(mu)?;
        let angles = self.angles(phi)?;
        self.evolve_density(rho.data_mut(), &angles, mu, None);
        Ok(rho)
    }

    /// Loss `Tr(H ρ(μ, φ))` starting from `|0…0⟩`.
    pub fn expectation(&self, h: &Hamiltonian, phi: &[f64], mu: f64) -> Result<f64> {
        self.expectation_from_basis(0, h, phi, mu)
    }

    /// Loss starting from computational basis state `|index⟩`.
    pub fn expectation_from_basis(
        &self,
        index: usize,
        h: &Hamiltonian,
        phi: &[f64],
        mu: f64,
    ) -> Result<f64> {
        let angles = self.angles(phi)?;
        self.expectation_at_angles(index, h, &angles, mu)
    }

    pub(crate) fn expectation_at_angles(
        &self,
        index: usize,
        h: &Hamiltonian,
        angles: &[f64],
        mu: f64,
    ) -> Result<f64> {
        self.check_eval(index, h, mu)?;
        if mu == 0.0 || !self.noisy {
            let psi = self.evolve_pure(index, angles);
            return Ok(psi.expectation(h));
        }
        let mut rho = DensityMatrix::basis_state(self.n, index)?;
        self.evolve_density(rho.data_mut(), angles, mu, None);
        rho.expectation(h)
    }

    /// Loss and its exact gradient, by adjoint (reverse-mode) propagation.
    pub fn value_and_grad_from_basis(
        &self,
        index: usize,
        h: &Hamiltonian,
        phi: &[f64],
        mu: f64,
    ) -> Result<(f64, Vec<f64>)> {
        let angles = self.angles(phi)?;
        self.check_eval(index, h, mu)?;
        let per_position = if mu == 0.0 || !self.noisy {
            let (v, g) = self.adjoint_pure(index, h, &angles);
            (v, g)
        } else {
            let dim = 1usize << self.n;
            let bytes = angles.len() * dim * dim * std::mem::size_of::<Complex64>();
            if bytes > ADJOINT_MEMORY_BUDGET {
                let v = self.expectation_at_angles(index, h, &angles, mu)?;
                (v, self.shift_at_angles(index, h, &angles, mu)?)
            } else {
                self.adjoint_density(index, h, &angles, mu)?
            }
        };
        Ok((per_position.0, self.accumulate(&per_position.1)))
    }

    /// Exact gradient by the two-term shift rule applied to each rotation
    /// position separately; shared parameters sum their positions.
    pub fn shift_grad_from_basis(
        &self,
        index: usize,
        h: &Hamiltonian,
        phi: &[f64],
        mu: f64,
    ) -> Result<Vec<f64>> {
        let angles = self.angles(phi)?;
        self.check_eval(index, h, mu)?;
        let per_position = self.shift_at_angles(index, h, &angles, mu)?;
        Ok(self.accumulate(&per_position))
    }

    fn shift_at_angles(
        &self,
        index: usize,
        h: &Hamiltonian,
        angles: &[f64],
        mu: f64,
    ) -> Result<Vec<f64>> {
        let mut shifted = angles.to_vec();
        let mut out = Vec::with_capacity(angles.len());
        for j in 0..angles.len() {
            shifted[j] = angles[j] + FRAC_PI_2;
            let plus = self.expectation_at_angles(index, h, &shifted, mu)?;
            shifted[j] = angles[j] - FRAC_PI_2;
            let minus = self.expectation_at_angles(index, h, &shifted, mu)?;
            shifted[j] = angles[j];
            out.push((plus - minus) / 2.0);
        }
        Ok(out)
    }

    /// Chain rule from per-position angle derivatives to parameters.
    fn accumulate(&self, per_position: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.m];
        for (&(param, scale), d) in self.positions().iter().zip(per_position) {
            grad[param] += scale * d;
        }
        grad
    }

    fn check_eval(&self, index: usize, h: &Hamiltonian, mu: f64) -> Result<()> {
        check_mu(mu)?;
        if h.n() != self.n {
            return Err(Error::QubitMismatch(self.n, h.n()));
        }
        if index >= 1 << self.n {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {} qubits",
                self.n
            )));
        }
        Ok(())
    }

    fn evolve_density(
        &self,
        buf: &mut [Complex64],
        angles: &[f64],
        mu: f64,
        mut store: Option<&mut Vec<Vec<Complex64>>>,
    ) {
        let mut pos = 0;
        for op in &self.ops {
            match op {
                CircuitOp::Clifford(g) => conj_clifford(buf, self.n, g),
                CircuitOp::Rotation { pauli, .. } => {
                    kernel::rotate(buf, self.n, pauli, angles[pos]);
                    pos += 1;
                    if let Some(s) = store.as_deref_mut() {
                        s.push(buf.to_vec());
                    }
                }
                CircuitOp::Noise { pauli } => kernel::pauli_mix(buf, self.n, pauli, mu / 2.0),
            }
        }
    }

    fn evolve_pure(&self, index: usize, angles: &[f64]) -> StateVector {
        let mut psi = StateVector::basis(self.n, index);
        let mut pos = 0;
        for op in &self.ops {
            match op {
                CircuitOp::Clifford(g) => psi.apply_clifford(g),
                CircuitOp::Rotation { pauli, .. } => {
                    psi.apply_rotation(pauli, angles[pos]);
                    pos += 1;
                }
                CircuitOp::Noise { .. } => {}
            }
        }
        psi
    }

    fn adjoint_pure(&self, index: usize, h: &Hamiltonian, angles: &[f64]) -> (f64, Vec<f64>) {
        let mut psi = self.evolve_pure(index, angles);
        let mut lambda = psi.apply_hamiltonian(h);
        let value = psi.inner(&lambda).re;
        let mut grad = vec![0.0; angles.len()];
        let mut pos = angles.len();
        for op in self.ops.iter().rev() {
            match op {
                CircuitOp::Clifford(g) => {
                    let inv = g.inverse();
                    psi.apply_clifford(&inv);
                    lambda.apply_clifford(&inv);
                }
                CircuitOp::Rotation { pauli, .. } => {
                    pos -= 1;
                    let mut p_psi = psi.clone();
                    p_psi.apply_pauli(pauli);
                    grad[pos] = -lambda.inner(&p_psi).im;
                    psi.apply_rotation(pauli, -angles[pos]);
                    lambda.apply_rotation(pauli, -angles[pos]);
                }
                CircuitOp::Noise { .. } => {}
            }
        }
        (value, grad)
    }

    fn adjoint_density(
        &self,
        index: usize,
        h: &Hamiltonian,
        angles: &[f64],
        mu: f64,
    ) -> Result<(f64, Vec<f64>)> {
        let mut rho = DensityMatrix::basis_state(self.n, index)?;
        let mut stored = Vec::with_capacity(angles.len());
        self.evolve_density(rho.data_mut(), angles, mu, Some(&mut stored));
        let value = rho.expectation(h)?;

        let mut obs = h.to_dense();
        let mut grad = vec![0.0; angles.len()];
        let mut pos = angles.len();
        for op in self.ops.iter().rev() {
            match op {
                CircuitOp::Clifford(g) => conj_clifford(&mut obs, self.n, &g.inverse()),
                CircuitOp::Rotation { pauli, .. } => {
                    pos -= 1;
                    let t = kernel::trace_o_p_sigma(&obs, &stored[pos], self.n, pauli);
                    grad[pos] = -t.im;
                    kernel::rotate(&mut obs, self.n, pauli, -angles[pos]);
                }
                CircuitOp::Noise { pauli } => kernel::pauli_mix(&mut obs, self.n, pauli, mu / 2.0),
            }
        }
        Ok((value, grad))
    }
}

fn check_pauli(p: &PauliString, n: usize) -> Result<()> {
    if p.n() != n {
        return Err(Error::QubitMismatch(n, p.n()));
    }
    if !p.is_hermitian() {
        return Err(Error::NonHermitian(p.to_string()));
    }
    Ok(())
}

/// Incremental circuit construction. Rotations get their noise channel
/// attached automatically unless built with [`CircuitBuilder::without_noise`].
#[derive(Debug, Clone)]
pub struct CircuitBuilder {
    n: usize,
    ops: Vec<CircuitOp>,
    with_noise: bool,
}

impl CircuitBuilder {
    pub fn without_noise(mut self) -> Self {
        self.with_noise = false;
        self
    }

    pub fn clifford(mut self, kind: CliffordKind, targets: &[usize]) -> Result<Self> {
        self.ops
            .push(CircuitOp::Clifford(CliffordGate::new(kind, targets)?));
        Ok(self)
    }

    pub fn h(self, q: usize) -> Result<Self> {
        self.clifford(CliffordKind::H, &[q])
    }

    pub fn cx(self, control: usize, target: usize) -> Result<Self> {
        self.clifford(CliffordKind::Cx, &[control, target])
    }

    pub fn rotation(self, pauli: PauliString, param: usize) -> Self {
        self.rotation_scaled(pauli, param, 1.0)
    }

    pub fn rotation_scaled(mut self, pauli: PauliString, param: usize, scale: f64) -> Self {
        self.ops.push(CircuitOp::Rotation {
            pauli,
            param,
            scale,
        });
        if self.with_noise {
            self.ops.push(CircuitOp::Noise { pauli });
        }
        self
    }

    pub fn build(self) -> Result<Circuit> {
        let m = self
            .ops
            .iter()
            .filter_map(|op| match op {
                CircuitOp::Rotation { param, .. } => Some(param + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        Circuit::new(self.n, m, self.ops)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paulisim::random::{random_circuit, random_hamiltonian};
    use crate::seed::rng_from_seed;
    use std::f64::consts::PI;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn single_x() -> Circuit {
        Circuit::builder(1).rotation(p("X"), 0).build().unwrap()
    }

    #[test]
    fn single_rotation_loss_is_damped_cosine() {
        let c = single_x();
        let z = Hamiltonian::z(1, 0).unwrap();
        for &phi in &[0.0, 0.4, 1.9, -2.5] {
            let l0 = c.expectation(&z, &[phi], 0.0).unwrap();
            assert!((l0 - phi.cos()).abs() < 1e-14);
            for &mu in &[0.2, 0.5, 1.0] {
                let l = c.expectation(&z, &[phi], mu).unwrap();
                assert!((l - (1.0 - mu) * phi.cos()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn parameter_length_checked() {
        let c = single_x();
        let z = Hamiltonian::z(1, 0).unwrap();
        assert!(matches!(
            c.expectation(&z, &[0.1, 0.2], 0.0),
            Err(Error::ParamLength {
                expected: 1,
                got: 2
            })
        ));
        assert!(matches!(c.run(&[0.1], 1.2), Err(Error::InvalidMu(_))));
    }

    #[test]
    fn noise_placement_enforced() {
        let rot = CircuitOp::Rotation {
            pauli: p("XZ"),
            param: 0,
            scale: 1.0,
        };
        // channel on a different pauli
        let bad = Circuit::new(2, 1, vec![rot.clone(), CircuitOp::Noise { pauli: p("ZZ") }]);
        assert!(bad.is_err());
        // channel not directly after the rotation
        let h = CircuitOp::Clifford(CliffordGate::new(CliffordKind::H, &[0]).unwrap());
        let bad = Circuit::new(
            2,
            1,
            vec![rot.clone(), h, CircuitOp::Noise { pauli: p("XZ") }],
        );
        assert!(bad.is_err());
        // second rotation lacks its channel
        let bad = Circuit::new(
            2,
            1,
            vec![
                rot.clone(),
                CircuitOp::Noise { pauli: p("XZ") },
                rot.clone(),
            ],
        );
        assert!(bad.is_err());
        // unused parameter
        assert!(Circuit::new(2, 2, vec![rot.clone()]).is_err());
        assert!(Circuit::new(2, 1, vec![rot]).is_ok());
    }

    #[test]
    fn full_noise_leaves_constant_mode() {
        let mut rng = rng_from_seed(11);
        let c = random_circuit(3, 3, &mut rng).unwrap();
        let h = random_hamiltonian(3, 4, &mut rng).unwrap();
        let phi0 = [0.3, 1.1, 2.0];
        let base = c.expectation(&h, &phi0, 1.0).unwrap();
        // the φ-average of the noiseless loss on the exact 3-point grid
        let nodes = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];
        let mut avg = 0.0;
        for a in nodes {
            for b in nodes {
                for d in nodes {
                    avg += c.expectation(&h, &[a, b, d], 0.0).unwrap();
                }
            }
        }
        avg /= 27.0;
        assert!((base - avg).abs() < 1e-12);
        let other = c.expectation(&h, &[2.2, -0.7, 5.0], 1.0).unwrap();
        assert!((other - base).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_matches_stripped_circuit() {
        let mut rng = rng_from_seed(12);
        for _ in 0..10 {
            let c = random_circuit(3, 4, &mut rng).unwrap();
            let bare = c.strip_noise();
            let phi = crate::seed::uniform_angles(&mut rng, 4);
            let a = c.run(&phi, 0.0).unwrap();
            let b = bare.run(&phi, 0.7).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-12);
        }
    }

    #[test]
    fn pure_path_matches_density_path() {
        let mut rng = rng_from_seed(13);
        for _ in 0..10 {
            let c = random_circuit(3, 5, &mut rng).unwrap();
            let h = random_hamiltonian(3, 5, &mut rng).unwrap();
            let phi = crate::seed::uniform_angles(&mut rng, 5);
            let pure = c.expectation(&h, &phi, 0.0).unwrap();
            let dense = c.run(&phi, 0.0).unwrap().expectation(&h).unwrap();
            assert!((pure - dense).abs() < 1e-12);
        }
    }

    #[test]
    fn adjoint_gradient_matches_shift_rule() {
        let mut rng = rng_from_seed(14);
        for &mu in &[0.0, 0.35] {
            for _ in 0..5 {
                let c = random_circuit(3, 5, &mut rng).unwrap();
                let h = random_hamiltonian(3, 4, &mut rng).unwrap();
                let phi = crate::seed::uniform_angles(&mut rng, 5);
                let (v, g) = c.value_and_grad_from_basis(0, &h, &phi, mu).unwrap();
                let gs = c.shift_grad_from_basis(0, &h, &phi, mu).unwrap();
                assert!((v - c.expectation(&h, &phi, mu).unwrap()).abs() < 1e-12);
                for (a, b) in g.iter().zip(&gs) {
                    assert!((a - b).abs() < 1e-11, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn shared_and_scaled_parameters_differentiate_correctly() {
        let c = Circuit::builder(2)
            .h(0)
            .unwrap()
            .h(1)
            .unwrap()
            .rotation_scaled(p("ZZ"), 0, -1.4)
            .rotation_scaled(p("ZI"), 0, 0.6)
            .rotation(p("XI"), 1)
            .rotation_scaled(p("IX"), 1, -1.0)
            .build()
            .unwrap();
        let h = Hamiltonian::new(2, vec![(0.7, p("ZZ")), (-0.4, p("IZ"))]).unwrap();
        let phi = [0.8, -0.3];
        for &mu in &[0.0, 0.4] {
            let (_, g) = c.value_and_grad_from_basis(0, &h, &phi, mu).unwrap();
            let gs = c.shift_grad_from_basis(0, &h, &phi, mu).unwrap();
            for k in 0..2 {
                let mut a = phi;
                let mut b = phi;
                a[k] += 1e-6;
                b[k] -= 1e-6;
                let fd = (c.expectation(&h, &a, mu).unwrap() - c.expectation(&h, &b, mu).unwrap())
                    / 2e-6;
                assert!((g[k] - fd).abs() < 1e-8);
                assert!((gs[k] - fd).abs() < 1e-8);
            }
        }
        assert!(!c.has_unit_frequencies());
        let e = c.expand_positions();
        assert_eq!(e.num_params(), 4);
        let angles = c.angles(&phi).unwrap();
        let lhs = c.expectation(&h, &phi, 0.3).unwrap();
        let rhs = e.expectation(&h, &angles, 0.3).unwrap();
        assert!((lhs - rhs).abs() < 1e-14);
    }
}
