use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::grid::GridAxis;
use crate::error::{Error, Result};
use crate::optim::{AdamConfig, Schedule};
use crate::qcnn::{DEFAULT_MARGIN, DEFAULT_TEST, DEFAULT_TRAIN};
use crate::whrf::default_bin_floor;

/// The model an experiment optimizes, selected by `kind` in `[model]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    /// Single-layer QAOA on a seeded random Z-string Hamiltonian.
    QaoaToy {
        #[serde(default = "default_qaoa_n")]
        n: usize,
        /// Seed of the cost Hamiltonian; derived from the master seed if absent.
        #[serde(default)]
        hamiltonian_seed: Option<u64>,
    },
    /// Wishart random fields, `instances` per entry of `gammas`.
    Whrf {
        #[serde(default = "default_whrf_m")]
        m: usize,
        #[serde(default = "default_gammas")]
        gammas: Vec<f64>,
        #[serde(default = "default_instances")]
        instances: usize,
        /// Histogram span floor relative to the landscape mean.
        #[serde(default = "default_bin_floor")]
        bin_floor: f64,
    },
    /// Teacher/student QCNN; `n_starts` is the number of students per teacher.
    Qcnn {
        #[serde(default = "default_qcnn_n")]
        n: usize,
        #[serde(default = "default_teachers")]
        teachers: usize,
        #[serde(default = "default_train")]
        train: usize,
        #[serde(default = "default_test")]
        test: usize,
        #[serde(default = "default_margin")]
        margin: f64,
    },
    /// Product of single-qubit X rotations read out by `Σ_k Z_k`:
    /// `L = (1 − μ) Σ_k cos φ_k`.
    Cosine {
        #[serde(default = "default_cosine_m")]
        m: usize,
    },
    /// Suppression-law and heat-equation audit on random circuits.
    FourierAudit {
        #[serde(default = "default_audit_n")]
        n: usize,
        #[serde(default = "default_audit_m")]
        m: usize,
        #[serde(default = "default_circuits")]
        circuits: usize,
        #[serde(default = "default_terms")]
        terms: usize,
        #[serde(default = "default_mus")]
        mus: Vec<f64>,
        #[serde(default = "default_points")]
        points: usize,
    },
}

fn default_qaoa_n() -> usize {
    5
}
fn default_whrf_m() -> usize {
    8
}
fn default_gammas() -> Vec<f64> {
    vec![0.03]
}
fn default_instances() -> usize {
    10
}
fn default_qcnn_n() -> usize {
    4
}
fn default_teachers() -> usize {
    1
}
fn default_train() -> usize {
    DEFAULT_TRAIN
}
fn default_test() -> usize {
    DEFAULT_TEST
}
fn default_margin() -> f64 {
    DEFAULT_MARGIN
}
fn default_cosine_m() -> usize {
    1
}
fn default_audit_n() -> usize {
    3
}
fn default_audit_m() -> usize {
    4
}
fn default_circuits() -> usize {
    10
}
fn default_terms() -> usize {
    3
}
fn default_mus() -> Vec<f64> {
    vec![0.1, 0.3, 0.5, 0.7, 0.9]
}
fn default_points() -> usize {
    20
}

impl ModelConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelConfig::QaoaToy { .. } => "qaoa-toy",
            ModelConfig::Whrf { .. } => "whrf",
            ModelConfig::Qcnn { .. } => "qcnn",
            ModelConfig::Cosine { .. } => "cosine",
            ModelConfig::FourierAudit { .. } => "fourier-audit",
        }
    }
}

/// Landscape slices written to `grids/`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_axes")]
    pub axes: Vec<GridAxis>,
    #[serde(default = "default_grid_mus")]
    pub mus: Vec<f64>,
}

fn default_axes() -> Vec<GridAxis> {
    vec![GridAxis::full_period(0, 61), GridAxis::full_period(1, 61)]
}

fn default_grid_mus() -> Vec<f64> {
    vec![0.0, 1.0 / 3.0]
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            axes: default_axes(),
            mus: default_grid_mus(),
        }
    }
}

/// A complete experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub adam: AdamConfig,
    #[serde(default = "default_starts")]
    pub n_starts: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Run only the unregularized cohort.
    #[serde(default)]
    pub baseline_only: bool,
    /// Write one JSON document per run under `runs/`.
    #[serde(default = "default_true")]
    pub persist_runs: bool,
    #[serde(default)]
    pub record_trajectories: bool,
    #[serde(default)]
    pub grid: Option<GridConfig>,
}

fn default_starts() -> usize {
    100
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.adam.validate()?;
        if self.n_starts == 0 {
            return Err(Error::Config("n_starts must be >= 1".into()));
        }
        match &self.model {
            ModelConfig::Whrf {
                gammas, instances, ..
            } if gammas.is_empty() || *instances == 0 => Err(Error::Config(
                "whrf needs at least one gamma and instance".into(),
            )),
            ModelConfig::Qcnn { teachers: 0, .. } => {
                Err(Error::Config("qcnn needs a teacher".into()))
            }
            ModelConfig::FourierAudit { circuits: 0, .. } => {
                Err(Error::Config("fourier audit needs circuits".into()))
            }
            _ => Ok(()),
        }
    }
}
