//! Gradients, ADAM, noise schedules and multistart optimization.

mod adam;
mod loss;
mod runner;
mod schedule;
mod stats;

pub use adam::{AdamConfig, AdamState};
pub use loss::{fd_grad, param_shift_grad, CircuitLoss, ParametricLoss};
pub use runner::{initial_point, multistart, optimize, run_seed, RunOptions, RunRecord};
pub use schedule::{Schedule, ScheduleKind};
pub use stats::{improvement_ratio, mean, percentile, percentile_improvement, std_dev};
