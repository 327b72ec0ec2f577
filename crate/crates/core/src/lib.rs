//! Noise-injection regularization for variational quantum loss landscapes.
//!
//! * [`paulisim`]: density-matrix simulator for Clifford + Pauli-rotation
//!   circuits with tunable Pauli noise `E_P(μ)` after every rotation.
//! * [`fourier`]: exact Fourier-mode extraction and the damping law
//!   `c_ω → (1 − μ)^{|ω|} c_ω`.
//! * [`optim`]: ADAM with noise-level schedules, multistart runs and
//!   percentile statistics.
//! * [`whrf`]: Wishart hypertoroidal random fields and their regularized loss.
//! * [`qcnn`]: quantum convolutional networks in a teacher/student setup.
//! * [`harness`]: configuration-driven experiments and reports.

pub mod error;
pub mod fourier;
pub mod harness;
pub mod optim;
pub mod paulisim;
pub mod qcnn;
pub mod seed;
pub mod whrf;

pub use error::{Error, Result};
