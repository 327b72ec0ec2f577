use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::loss::ParametricLoss;
use super::schedule::Schedule;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng_from_seed, uniform_angles};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    /// Keep every iterate `φ_i` in the record.
    pub record_trajectory: bool,
}

/// Outcome of one optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub seed: u64,
    pub schedule: Schedule,
    pub adam: AdamConfig,
    pub initial_phi: Vec<f64>,
    pub final_phi: Vec<f64>,
    /// `L(φ_i, 0)` for `i = 0..=i_max`.
    pub loss_mu0: Vec<f64>,
    /// `L(φ_i, μ(i))` for `i = 0..=i_max`.
    pub loss_reg: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<Vec<f64>>>,
    pub wall_time_s: f64,
    pub final_loss_mu0: f64,
    pub best_loss_mu0: f64,
}

impl RunRecord {
    pub fn iterations(&self) -> usize {
        self.schedule.i_max
    }
}

/// ADAM on `L(·, μ(i))` for `i_max` iterations starting at `phi0`.
pub fn optimize<F: ParametricLoss + ?Sized>(
    f: &F,
    phi0: &[f64],
    schedule: &Schedule,
    adam: &AdamConfig,
    options: RunOptions,
) -> Result<RunRecord> {
    schedule.validate()?;
    adam.validate()?;
    if phi0.len() != f.num_params() {
        return Err(Error::ParamLength {
            expected: f.num_params(),
            got: phi0.len(),
        });
    }
    let start = Instant::now();
    let i_max = schedule.i_max;
    let mut phi = phi0.to_vec();
    let mut state = AdamState::new(phi.len(), *adam);
    let mut loss_mu0 = Vec::with_capacity(i_max + 1);
    let mut loss_reg = Vec::with_capacity(i_max + 1);
    let mut trajectory = options
        .record_trajectory
        .then(|| Vec::with_capacity(i_max + 1));

    for i in 0..=i_max {
        let mu = schedule.mu(i)?;
        if let Some(t) = trajectory.as_mut() {
            t.push(phi.clone());
        }
        if i == i_max {
            loss_reg.push(f.value(&phi, mu)?);
            loss_mu0.push(if mu == 0.0 {
                loss_reg[i]
            } else {
                f.value(&phi, 0.0)?
            });
            break;
        }
        let (value, grad) = f.value_and_gradient(&phi, mu)?;
        loss_reg.push(value);
        loss_mu0.push(if mu == 0.0 {
            value
        } else {
            f.value(&phi, 0.0)?
        });
        state.step(&grad, &mut phi)?;
    }

    let final_loss_mu0 = loss_mu0[i_max];
    let best_loss_mu0 = loss_mu0.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(RunRecord {
        run_id: 0,
        seed: 0,
        schedule: *schedule,
        adam: *adam,
        initial_phi: phi0.to_vec(),
        final_phi: phi,
        loss_mu0,
        loss_reg,
        trajectory,
        wall_time_s: start.elapsed().as_secs_f64(),
        final_loss_mu0,
        best_loss_mu0,
    })
}

/// Seed of run `k` under `master_seed`.
pub fn run_seed(master_seed: u64, k: usize) -> u64 {
    derive_seed(master_seed, "run", k as u64)
}

/// Starting point of run `k`: uniform in (0, 2π)^m from the run's own stream.
pub fn initial_point(master_seed: u64, k: usize, m: usize) -> (u64, Vec<f64>) {
    let seed = run_seed(master_seed, k);
    (seed, uniform_angles(&mut rng_from_seed(seed), m))
}

/// `n_starts` independent runs. Run `k` depends only on `(master_seed, k)`,
/// so two cohorts with the same master seed share starting points.
pub fn multistart<F: ParametricLoss + ?Sized>(
    f: &F,
    n_starts: usize,
    schedule: &Schedule,
    adam: &AdamConfig,
    master_seed: u64,
    options: RunOptions,
) -> Result<Vec<RunRecord>> {
    if n_starts == 0 {
        return Err(Error::InvalidArgument("n_starts must be >= 1".into()));
    }
    (0..n_starts)
        .into_par_iter()
        .map(|k| {
            let (seed, phi0) = initial_point(master_seed, k, f.num_params());
            let mut rec = optimize(f, &phi0, schedule, adam, options)?;
            rec.run_id = k;
            rec.seed = seed;
            Ok(rec)
        })
        .collect()
}
