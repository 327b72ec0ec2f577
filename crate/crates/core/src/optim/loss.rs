use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::paulisim::{Circuit, Hamiltonian};

/// A loss `L(φ, μ)` over `num_params` angles, regularized by noise level μ.
/// `L(φ, 0)` is the unregularized loss.
pub trait ParametricLoss: Sync {
    fn num_params(&self) -> usize;

    fn value(&self, phi: &[f64], mu: f64) -> Result<f64>;

    /// Value and exact gradient; defaults to the two-term shift rule.
    fn value_and_gradient(&self, phi: &[f64], mu: f64) -> Result<(f64, Vec<f64>)> {
        Ok((self.value(phi, mu)?, param_shift_grad(self, phi, mu)?))
    }
}

fn check_len<F: ParametricLoss + ?Sized>(f: &F, phi: &[f64]) -> Result<()> {
    if phi.len() != f.num_params() {
        return Err(Error::ParamLength {
            expected: f.num_params(),
            got: phi.len(),
        });
    }
    Ok(())
}

/// `∂L/∂φ_k = [L(φ + π/2 e_k) − L(φ − π/2 e_k)] / 2`; exact when each
/// parameter enters as `a + b cos φ_k + c sin φ_k`.
pub fn param_shift_grad<F: ParametricLoss + ?Sized>(
    f: &F,
    phi: &[f64],
    mu: f64,
) -> Result<Vec<f64>> {
    check_len(f, phi)?;
    let mut shifted = phi.to_vec();
    let mut grad = Vec::with_capacity(phi.len());
    for k in 0..phi.len() {
        shifted[k] = phi[k] + FRAC_PI_2;
        let plus = f.value(&shifted, mu)?;
        shifted[k] = phi[k] - FRAC_PI_2;
        let minus = f.value(&shifted, mu)?;
        shifted[k] = phi[k];
        grad.push((plus - minus) / 2.0);
    }
    Ok(grad)
}

/// Central finite differences with step `h`.
pub fn fd_grad<F: ParametricLoss + ?Sized>(
    f: &F,
    phi: &[f64],
    mu: f64,
    h: f64,
) -> Result<Vec<f64>> {
    check_len(f, phi)?;
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step must be > 0, got {h}"
        )));
    }
    let mut shifted = phi.to_vec();
    let mut grad = Vec::with_capacity(phi.len());
    for k in 0..phi.len() {
        shifted[k] = phi[k] + h;
        let plus = f.value(&shifted, mu)?;
        shifted[k] = phi[k] - h;
        let minus = f.value(&shifted, mu)?;
        shifted[k] = phi[k];
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

/// `Tr(H ρ(μ, φ))` for a circuit run from `|0…0⟩`, with adjoint gradients.
#[derive(Debug, Clone)]
pub struct CircuitLoss {
    pub circuit: Circuit,
    pub observable: Hamiltonian,
}

impl CircuitLoss {
    pub fn new(circuit: Circuit, observable: Hamiltonian) -> Result<Self> {
        if circuit.n() != observable.n() {
            return Err(Error::QubitMismatch(circuit.n(), observable.n()));
        }
        Ok(Self {
            circuit,
            observable,
        })
    }
}

impl ParametricLoss for CircuitLoss {
    fn num_params(&self) -> usize {
        self.circuit.num_params()
    }

    fn value(&self, phi: &[f64], mu: f64) -> Result<f64> {
        self.circuit.expectation(&self.observable, phi, mu)
    }

    fn value_and_gradient(&self, phi: &[f64], mu: f64) -> Result<(f64, Vec<f64>)> {
        self.circuit
            .value_and_grad_from_basis(0, &self.observable, phi, mu)
    }
}
