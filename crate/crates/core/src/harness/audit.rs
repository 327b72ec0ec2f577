use std::io::Write;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fourier::{
    extract_modes_capped, heat_residual, FourierTable, DEFAULT_HEAT_STEP, MAX_MODE_CAP,
};
use crate::paulisim::{Circuit, Hamiltonian};
use crate::seed::{rng_from_seed, uniform_angles};

/// Largest heat time sampled by the audit.
pub const AUDIT_MAX_TIME: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    pub mus: Vec<f64>,
    /// Random angle vectors per μ, and random `(φ, t)` pairs for the heat check.
    pub points: usize,
    pub seed: u64,
}

/// Worst deviations found for one circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitAudit {
    pub positions: usize,
    pub modes: usize,
    /// `(μ, max |noisy loss − damped reconstruction|)`.
    pub suppression: Vec<(f64, f64)>,
    pub heat_residual: f64,
}

impl CircuitAudit {
    pub fn max_suppression(&self) -> f64 {
        self.suppression.iter().map(|s| s.1).fold(0.0, f64::max)
    }
}

/// Extracts the Fourier table of `c` over its rotation positions and checks
/// the damping law and the heat equation at random points. Shared or scaled
/// parameters are handled by giving every rotation its own angle.
pub fn audit_circuit(
    c: &Circuit,
    h: &Hamiltonian,
    opts: &AuditOptions,
) -> Result<(FourierTable, CircuitAudit)> {
    let expanded = c.expand_positions();
    let table = extract_modes_capped(&expanded, h, MAX_MODE_CAP)?;
    let k = expanded.num_params();
    let mut rng = rng_from_seed(opts.seed);
    let mut suppression = Vec::with_capacity(opts.mus.len());
    for &mu in &opts.mus {
        let mut worst: f64 = 0.0;
        for _ in 0..opts.points {
            let phi = uniform_angles(&mut rng, k);
            let noisy = expanded.expectation(h, &phi, mu)?;
            worst = worst.max((noisy - table.damped_eval(mu, &phi)?).abs());
        }
        suppression.push((mu, worst));
    }
    let mut heat: f64 = 0.0;
    for _ in 0..opts.points {
        let phi = uniform_angles(&mut rng, k);
        let t = rng.random_range(0.0..AUDIT_MAX_TIME);
        heat = heat.max(heat_residual(&expanded, h, &phi, t, DEFAULT_HEAT_STEP)?);
    }
    let audit = CircuitAudit {
        positions: k,
        modes: table.coeffs().len(),
        suppression,
        heat_residual: heat,
    };
    Ok((table, audit))
}

/// Columns `circuit,check,mu,max_abs_dev`; the heat row leaves `mu` empty.
pub fn write_audit_csv<W: Write>(audits: &[CircuitAudit], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["circuit", "check", "mu", "max_abs_dev"])?;
    for (i, a) in audits.iter().enumerate() {
        for (mu, dev) in &a.suppression {
            wtr.write_record([
                i.to_string(),
                "suppression".into(),
                mu.to_string(),
                dev.to_string(),
            ])?;
        }
        wtr.write_record([
            i.to_string(),
            "heat".into(),
            String::new(),
            a.heat_residual.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::qaoa::build_qaoa_toy;
    use crate::paulisim::random::{random_circuit, random_hamiltonian};

    #[test]
    fn random_circuit_passes_audit() {
        let mut rng = rng_from_seed(4);
        let c = random_circuit(2, 3, &mut rng).unwrap();
        let h = random_hamiltonian(2, 2, &mut rng).unwrap();
        let opts = AuditOptions {
            mus: vec![0.2, 0.8],
            points: 5,
            seed: 1,
        };
        let (table, a) = audit_circuit(&c, &h, &opts).unwrap();
        assert_eq!(a.positions, 3);
        assert_eq!(a.modes, table.coeffs().len());
        assert!(a.max_suppression() < 1e-9);
        assert!(a.heat_residual < 1e-4);
        let mut buf = Vec::new();
        write_audit_csv(&[a], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }

    #[test]
    fn shared_parameters_are_expanded() {
        let (c, h) = build_qaoa_toy(2, 5).unwrap();
        let opts = AuditOptions {
            mus: vec![0.5],
            points: 3,
            seed: 2,
        };
        let (_, a) = audit_circuit(&c, &h, &opts).unwrap();
        assert_eq!(a.positions, c.num_positions());
        assert!(a.max_suppression() < 1e-9);
    }
}
