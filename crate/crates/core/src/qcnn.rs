//! Quantum convolutional networks in a teacher/student setting.
//!
//! Each stage pairs up adjacent active qubits. A convolution block (15
//! parameters: `R_X R_Y R_Z` on each qubit, `R_XX R_YY R_ZZ`, then `R_X R_Y R_Z`
//! on each qubit again) acts on every pair with parameters shared across the
//! stage; a pooling block (`R_XX R_YY R_ZZ`, 3 shared parameters) follows, after
//! which the second qubit of each pair is dropped. An unpaired qubit passes to
//! the next stage untouched. Stages repeat until qubit 0 alone remains and
//! `Z` on it is read out.

use std::ops::Range;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::{optimize, AdamConfig, ParametricLoss, RunOptions, RunRecord, Schedule};
use crate::paulisim::{Circuit, CircuitBuilder, Hamiltonian, Pauli, PauliString};
use crate::seed::{rng_from_seed, uniform_angles};

pub const QCNN_VERSION: &str = "qcnn-v1";
pub const MIN_QUBITS: usize = 4;
pub const MAX_QUBITS: usize = 10;
pub const CONV_PARAMS: usize = 15;
pub const POOL_PARAMS: usize = 3;
pub const DEFAULT_MARGIN: f64 = 1e-6;
pub const DEFAULT_TRAIN: usize = 64;
pub const DEFAULT_TEST: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    /// Active qubits entering the stage.
    pub active: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
    pub conv_params: Range<usize>,
    pub pool_params: Range<usize>,
}

/// A built network: circuit template, stage plan and readout.
#[derive(Debug, Clone, PartialEq)]
pub struct QcnnSpec {
    pub n: usize,
    pub version: &'static str,
    pub stages: Vec<Stage>,
    pub circuit: Circuit,
    pub observable: Hamiltonian,
}

impl QcnnSpec {
    pub fn num_params(&self) -> usize {
        self.circuit.num_params()
    }

    /// Rotation positions (indices into the circuit's rotation sequence)
    /// driven by parameter `k`.
    pub fn param_positions(&self, k: usize) -> Vec<usize> {
        self.circuit
            .positions()
            .iter()
            .enumerate()
            .filter(|(_, (p, _))| *p == k)
            .map(|(i, _)| i)
            .collect()
    }

    /// Readout `⟨x|U†(φ) H U(φ)|x⟩` under noise level μ.
    pub fn predict(&self, x: usize, phi: &[f64], mu: f64) -> Result<f64> {
        self.circuit
            .expectation_from_basis(x, &self.observable, phi, mu)
    }
}

fn two_site(n: usize, a: usize, b: usize, p: Pauli) -> Result<PauliString> {
    PauliString::from_sites(n, &[(a, p), (b, p)])
}

fn local_rotations(
    mut bld: CircuitBuilder,
    n: usize,
    qubits: [usize; 2],
    base: usize,
) -> Result<CircuitBuilder> {
    let mut k = base;
    for q in qubits {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            bld = bld.rotation(PauliString::single(n, q, p)?, k);
            k += 1;
        }
    }
    Ok(bld)
}

fn conv_block(
    bld: CircuitBuilder,
    n: usize,
    a: usize,
    b: usize,
    base: usize,
) -> Result<CircuitBuilder> {
    let mut bld = local_rotations(bld, n, [a, b], base)?;
    for (j, p) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
        bld = bld.rotation(two_site(n, a, b, p)?, base + 6 + j);
    }
    local_rotations(bld, n, [a, b], base + 9)
}

fn pool_block(
    mut bld: CircuitBuilder,
    n: usize,
    a: usize,
    b: usize,
    base: usize,
) -> Result<CircuitBuilder> {
    for (j, p) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
        bld = bld.rotation(two_site(n, a, b, p)?, base + j);
    }
    Ok(bld)
}

/// Builds the `n`-qubit network (even `n` in 4..=10) with a noise channel
/// after every rotation.
pub fn build_qcnn(n: usize) -> Result<QcnnSpec> {
    if !(MIN_QUBITS..=MAX_QUBITS).contains(&n) || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "qcnn needs an even qubit count in {MIN_QUBITS}..={MAX_QUBITS}, got {n}"
        )));
    }
    let mut bld = Circuit::builder(n);
    let mut active: Vec<usize> = (0..n).collect();
    let mut stages = Vec::new();
    let mut next = 0;
    while active.len() > 1 {
        let pairs: Vec<(usize, usize)> = active.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        let conv = next..next + CONV_PARAMS;
        let pool = conv.end..conv.end + POOL_PARAMS;
        next = pool.end;
        for &(a, b) in &pairs {
            bld = conv_block(bld, n, a, b, conv.start)?;
        }
        for &(a, b) in &pairs {
            bld = pool_block(bld, n, a, b, pool.start)?;
        }
        let survivors: Vec<usize> = active.iter().copied().step_by(2).collect();
        stages.push(Stage {
            active: std::mem::replace(&mut active, survivors),
            pairs,
            conv_params: conv,
            pool_params: pool,
        });
    }
    let circuit = bld.build()?;
    Ok(QcnnSpec {
        n,
        version: QCNN_VERSION,
        stages,
        circuit,
        observable: Hamiltonian::z(n, active[0])?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Basis-state inputs with teacher labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub split: Split,
    pub entries: Vec<(usize, f64)>,
    pub teacher: Vec<f64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Train/test sizes limited to the `2^n` available basis states: when the
/// request does not fit, train keeps at most half and test takes the rest.
pub fn capped_sizes(n: usize, train: usize, test: usize) -> (usize, usize) {
    let total = 1usize << n;
    if train + test <= total {
        (train, test)
    } else {
        let t = train.min(total / 2);
        (t, total - t)
    }
}

/// Samples distinct basis states uniformly, labels them with the teacher and
/// skips states whose label magnitude is below `margin`.
pub fn gen_dataset(
    spec: &QcnnSpec,
    phi_star: &[f64],
    train: usize,
    test: usize,
    seed: u64,
    margin: f64,
) -> Result<(Dataset, Dataset)> {
    let total = 1usize << spec.n;
    if train + test > total {
        return Err(Error::InvalidArgument(format!(
            "{train} + {test} examples exceed the {total} basis states"
        )));
    }
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let mut picked = Vec::with_capacity(train + test);
    for x in order {
        if picked.len() == train + test {
            break;
        }
        let y = spec.predict(x, phi_star, 0.0)?;
        if y.abs() >= margin {
            picked.push((x, y));
        }
    }
    if picked.len() < train + test {
        return Err(Error::DegenerateTeacher(format!(
            "only {} of {total} inputs have |label| >= {margin}",
            picked.len()
        )));
    }
    let test_entries = picked.split_off(train);
    Ok((
        Dataset {
            split: Split::Train,
            entries: picked,
            teacher: phi_star.to_vec(),
        },
        Dataset {
            split: Split::Test,
            entries: test_entries,
            teacher: phi_star.to_vec(),
        },
    ))
}

/// Mean squared error between network readouts and dataset labels.
#[derive(Debug, Clone)]
pub struct QcnnLoss<'a> {
    pub spec: &'a QcnnSpec,
    pub data: &'a Dataset,
}

impl<'a> QcnnLoss<'a> {
    pub fn new(spec: &'a QcnnSpec, data: &'a Dataset) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::Empty("qcnn dataset"));
        }
        Ok(Self { spec, data })
    }

    /// Gradient from the two-term shift rule applied at every rotation
    /// position; a shared parameter sums the contributions of its positions.
    pub fn shift_gradient(&self, phi: &[f64], mu: f64) -> Result<Vec<f64>> {
        let c = &self.spec.circuit;
        let h = &self.spec.observable;
        let parts = self
            .data
            .entries
            .par_iter()
            .map(|&(x, y)| {
                let r = c.expectation_from_basis(x, h, phi, mu)? - y;
                Ok((r, c.shift_grad_from_basis(x, h, phi, mu)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let d = self.data.len() as f64;
        let mut grad = vec![0.0; phi.len()];
        for (r, g) in parts {
            for (acc, gk) in grad.iter_mut().zip(g) {
                *acc += 2.0 * r * gk / d;
            }
        }
        Ok(grad)
    }
}

impl ParametricLoss for QcnnLoss<'_> {
    fn num_params(&self) -> usize {
        self.spec.num_params()
    }

    fn value(&self, phi: &[f64], mu: f64) -> Result<f64> {
        let errs = self
            .data
            .entries
            .par_iter()
            .map(|&(x, y)| Ok((self.spec.predict(x, phi, mu)? - y).powi(2)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(errs.iter().sum::<f64>() / self.data.len() as f64)
    }

    fn value_and_gradient(&self, phi: &[f64], mu: f64) -> Result<(f64, Vec<f64>)> {
        let parts = self
            .data
            .entries
            .par_iter()
            .map(|&(x, y)| {
                let (yhat, g) = self.spec.circuit.value_and_grad_from_basis(
                    x,
                    &self.spec.observable,
                    phi,
                    mu,
                )?;
                Ok((yhat - y, g))
            })
            .collect::<Result<Vec<_>>>()?;
        let d = self.data.len() as f64;
        let mut value = 0.0;
        let mut grad = vec![0.0; phi.len()];
        for (r, g) in parts {
            value += r * r;
            for (acc, gk) in grad.iter_mut().zip(g) {
                *acc += 2.0 * r * gk;
            }
        }
        grad.iter_mut().for_each(|g| *g /= d);
        Ok((value / d, grad))
    }
}

/// Fraction of entries whose noiseless readout has the label's sign.
pub fn accuracy(spec: &QcnnSpec, data: &Dataset, phi: &[f64]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Empty("qcnn dataset"));
    }
    let hits = data
        .entries
        .par_iter()
        .map(|&(x, y)| Ok(spec.predict(x, phi, 0.0)?.signum() == y.signum()))
        .collect::<Result<Vec<bool>>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / data.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentResult {
    pub seed: u64,
    pub record: RunRecord,
    pub final_mse: f64,
    pub train_acc: f64,
    pub test_acc: f64,
}

/// Trains a student from a uniform random start drawn from `seed`.
pub fn train_student(
    spec: &QcnnSpec,
    train: &Dataset,
    test: &Dataset,
    schedule: &Schedule,
    adam: &AdamConfig,
    seed: u64,
) -> Result<StudentResult> {
    let phi0 = uniform_angles(&mut rng_from_seed(seed), spec.num_params());
    train_student_from(spec, train, test, &phi0, schedule, adam, seed)
}

pub fn train_student_from(
    spec: &QcnnSpec,
    train: &Dataset,
    test: &Dataset,
    phi0: &[f64],
    schedule: &Schedule,
    adam: &AdamConfig,
    seed: u64,
) -> Result<StudentResult> {
    let loss = QcnnLoss::new(spec, train)?;
    let mut record = optimize(&loss, phi0, schedule, adam, RunOptions::default())?;
    record.seed = seed;
    Ok(StudentResult {
        seed,
        final_mse: record.final_loss_mu0,
        train_acc: accuracy(spec, train, &record.final_phi)?,
        test_acc: accuracy(spec, test, &record.final_phi)?,
        record,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::fd_grad;
    use crate::paulisim::CircuitOp;
    use crate::seed::derive_seed;

    fn teacher(spec: &QcnnSpec, seed: u64) -> Vec<f64> {
        uniform_angles(&mut rng_from_seed(seed), spec.num_params())
    }

    #[test]
    fn parameter_counts_and_stages() {
        let s4 = build_qcnn(4).unwrap();
        assert_eq!(s4.stages.len(), 2);
        assert_eq!(s4.num_params(), 36);
        let s8 = build_qcnn(8).unwrap();
        assert_eq!(s8.stages.len(), 3);
        assert_eq!(s8.num_params(), 54);
        let s10 = build_qcnn(10).unwrap();
        let sizes: Vec<usize> = s10.stages.iter().map(|s| s.active.len()).collect();
        assert_eq!(sizes, vec![10, 5, 3, 2]);
        for bad in [2, 5, 12] {
            assert!(build_qcnn(bad).is_err());
        }
    }

    #[test]
    fn active_set_shrinks_and_dropped_qubits_stay_idle() {
        let spec = build_qcnn(8).unwrap();
        let mut dropped = [false; 8];
        for stage in &spec.stages {
            for &(a, b) in &stage.pairs {
                assert!(!dropped[a] && !dropped[b]);
            }
            for &(_, b) in &stage.pairs {
                dropped[b] = true;
            }
        }
        assert_eq!(dropped.iter().filter(|d| !**d).count(), 1);
        assert!(!dropped[0]);
        assert_eq!(spec.observable, Hamiltonian::z(8, 0).unwrap());
    }

    #[test]
    fn circuit_has_the_noisy_rotation_form() {
        let spec = build_qcnn(6).unwrap();
        let ops = spec.circuit.ops();
        for (i, op) in ops.iter().enumerate() {
            match op {
                CircuitOp::Rotation { pauli, .. } => match &ops[i + 1] {
                    CircuitOp::Noise { pauli: q } => assert_eq!(q, pauli),
                    other => panic!("rotation not followed by its channel: {other:?}"),
                },
                CircuitOp::Noise { .. } => {}
                CircuitOp::Clifford(_) => {}
            }
        }
        // shared positions use the same local pauli letters
        let positions = spec.circuit.positions();
        let paulis: Vec<PauliString> = ops
            .iter()
            .filter_map(|op| match op {
                CircuitOp::Rotation { pauli, .. } => Some(*pauli),
                _ => None,
            })
            .collect();
        for k in 0..spec.num_params() {
            let mut kinds = spec.param_positions(k).into_iter().map(|p| {
                let mut letters: Vec<char> = paulis[p]
                    .to_string()
                    .chars()
                    .filter(|c| *c != 'I')
                    .collect();
                letters.sort();
                letters
            });
            let first = kinds.next().unwrap();
            assert!(kinds.all(|k| k == first));
        }
        assert_eq!(positions.len(), paulis.len());
    }

    #[test]
    fn teacher_reproduces_its_labels() {
        let spec = build_qcnn(4).unwrap();
        let phi_star = teacher(&spec, 1);
        let (tr, te) = gen_dataset(&spec, &phi_star, 8, 8, 2, DEFAULT_MARGIN).unwrap();
        assert_eq!(tr.len(), 8);
        assert_eq!(te.len(), 8);
        let mut all: Vec<usize> = tr.entries.iter().chain(&te.entries).map(|e| e.0).collect();
        all.sort();
        assert_eq!(all, (0..16).collect::<Vec<_>>());
        for &(x, y) in tr.entries.iter().chain(&te.entries) {
            assert!((spec.predict(x, &phi_star, 0.0).unwrap() - y).abs() < 1e-10);
            assert!(y.abs() >= DEFAULT_MARGIN);
        }
        let loss = QcnnLoss::new(&spec, &tr).unwrap();
        assert!(loss.value(&phi_star, 0.0).unwrap() < 1e-12);
        assert_eq!(accuracy(&spec, &te, &phi_star).unwrap(), 1.0);
        assert_eq!(
            gen_dataset(&spec, &phi_star, 8, 8, 2, DEFAULT_MARGIN).unwrap(),
            (tr.clone(), te.clone())
        );
        assert!(gen_dataset(&spec, &phi_star, 10, 8, 2, DEFAULT_MARGIN).is_err());

        let flipped = Dataset {
            entries: te.entries.iter().map(|&(x, y)| (x, -y)).collect(),
            ..te.clone()
        };
        assert_eq!(accuracy(&spec, &flipped, &phi_star).unwrap(), 0.0);
        let r = train_student_from(
            &spec,
            &tr,
            &te,
            &phi_star,
            &Schedule::baseline(1),
            &AdamConfig::default(),
            0,
        )
        .unwrap();
        assert_eq!(r.test_acc, 1.0);
    }

    #[test]
    fn degenerate_teacher_detected() {
        let spec = build_qcnn(4).unwrap();
        let zero = vec![0.0; spec.num_params()];
        // identity teacher: labels are ±1 by bit 0
        let (tr, _) = gen_dataset(&spec, &zero, 8, 8, 3, DEFAULT_MARGIN).unwrap();
        for &(x, y) in &tr.entries {
            assert_eq!(y, if x & 1 == 0 { 1.0 } else { -1.0 });
        }
        assert!(matches!(
            gen_dataset(&spec, &zero, 8, 8, 3, 1.5),
            Err(Error::DegenerateTeacher(_))
        ));
    }

    #[test]
    fn loss_arithmetic_and_bounds() {
        let spec = build_qcnn(4).unwrap();
        let zero = vec![0.0; spec.num_params()];
        // input 1 reads out −1; a +1 label costs 4
        let data = Dataset {
            split: Split::Train,
            entries: vec![(1, 1.0)],
            teacher: zero.clone(),
        };
        let loss = QcnnLoss::new(&spec, &data).unwrap();
        assert!((loss.value(&zero, 0.0).unwrap() - 4.0).abs() < 1e-12);
        let phi = teacher(&spec, 9);
        let v = loss.value(&phi, 0.4).unwrap();
        assert!((0.0..=4.0).contains(&v));
    }

    #[test]
    fn gradients_match_finite_differences() {
        let spec = build_qcnn(4).unwrap();
        let phi_star = teacher(&spec, 4);
        let (tr, _) = gen_dataset(&spec, &phi_star, 8, 8, 5, DEFAULT_MARGIN).unwrap();
        let loss = QcnnLoss::new(&spec, &tr).unwrap();
        let phi = teacher(&spec, 6);
        for &mu in &[0.0, 0.3] {
            let (v, g) = loss.value_and_gradient(&phi, mu).unwrap();
            assert!((v - loss.value(&phi, mu).unwrap()).abs() < 1e-12);
            let fd = fd_grad(&loss, &phi, mu, 1e-5).unwrap();
            let shift = loss.shift_gradient(&phi, mu).unwrap();
            for k in 0..g.len() {
                assert!(
                    (shift[k] - fd[k]).abs() < 1e-6,
                    "param {k}: {} vs {}",
                    shift[k],
                    fd[k]
                );
                assert!((g[k] - shift[k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn random_students_guess() {
        let spec = build_qcnn(4).unwrap();
        let mut total = 0.0;
        let n = 100;
        for s in 0..n {
            let phi_star = teacher(&spec, derive_seed(1, "teacher", s));
            let (_, te) = gen_dataset(&spec, &phi_star, 8, 8, s, DEFAULT_MARGIN).unwrap();
            let student = teacher(&spec, derive_seed(1, "student", s));
            total += accuracy(&spec, &te, &student).unwrap();
        }
        let avg = total / n as f64;
        assert!((avg - 0.5).abs() < 0.1, "{avg}");
    }

    #[test]
    fn capped_dataset_sizes() {
        assert_eq!(capped_sizes(4, 64, 256), (8, 8));
        assert_eq!(capped_sizes(8, 64, 256), (64, 192));
        assert_eq!(capped_sizes(10, 64, 256), (64, 256));
    }
}
