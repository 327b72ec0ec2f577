use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleKind {
    /// `μ_max e^{−a i / i_max}`.
    Exponential,
    /// `μ_max (1 − i / i_max)`.
    Linear,
    /// `μ_max (1 + cos(π i / i_max)) / 2`.
    Cosine,
    /// `μ_max` for the first half of the run, then 0.
    Step,
    /// `μ_max` throughout; with `μ_max = 0` this is the unregularized baseline.
    Constant,
}

impl ScheduleKind {
    pub fn name(self) -> &'static str {
        match self {
            ScheduleKind::Exponential => "exponential",
            ScheduleKind::Linear => "linear",
            ScheduleKind::Cosine => "cosine",
            ScheduleKind::Step => "step",
            ScheduleKind::Constant => "constant",
        }
    }
}

/// Noise level as a function of the iteration count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub mu_max: f64,
    /// Decay rate; used by the exponential kind only.
    pub a: f64,
    pub i_max: usize,
}

impl Default for Schedule {
    /// `μ_max = 0.9`, `a = 10`, 2000 iterations.
    fn default() -> Self {
        Self::exponential(2000)
    }
}

impl Schedule {
    pub fn new(kind: ScheduleKind, mu_max: f64, a: f64, i_max: usize) -> Result<Self> {
        let s = Self {
            kind,
            mu_max,
            a,
            i_max,
        };
        s.validate()?;
        Ok(s)
    }

    /// `μ_max = 0.9`, `a = 10`.
    pub fn exponential(i_max: usize) -> Self {
        Self {
            kind: ScheduleKind::Exponential,
            mu_max: 0.9,
            a: 10.0,
            i_max,
        }
    }

    /// `μ ≡ 0`.
    pub fn baseline(i_max: usize) -> Self {
        Self {
            kind: ScheduleKind::Constant,
            mu_max: 0.0,
            a: 0.0,
            i_max,
        }
    }

    pub fn is_baseline(&self) -> bool {
        self.mu_max == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.mu_max) {
            return Err(Error::InvalidMu(self.mu_max));
        }
        if !(self.a.is_finite() && self.a >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "schedule decay rate must be finite and >= 0, got {}",
                self.a
            )));
        }
        if self.i_max == 0 {
            return Err(Error::InvalidArgument("schedule needs i_max >= 1".into()));
        }
        Ok(())
    }

    /// `μ(i)` for `0 ≤ i ≤ i_max`.
    pub fn mu(&self, i: usize) -> Result<f64> {
        if i > self.i_max {
            return Err(Error::IterationOutOfRange {
                i,
                i_max: self.i_max,
            });
        }
        let frac = i as f64 / self.i_max as f64;
        let mu = match self.kind {
            ScheduleKind::Exponential => self.mu_max * (-self.a * frac).exp(),
            ScheduleKind::Linear => self.mu_max * (1.0 - frac),
            ScheduleKind::Cosine => self.mu_max * (1.0 + (PI * frac).cos()) / 2.0,
            ScheduleKind::Step => {
                if 2 * i < self.i_max {
                    self.mu_max
                } else {
                    0.0
                }
            }
            ScheduleKind::Constant => self.mu_max,
        };
        Ok(mu.clamp(0.0, self.mu_max))
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ScheduleKind::Exponential => write!(
                f,
                "exponential(mu_max={},a={},i_max={})",
                self.mu_max, self.a, self.i_max
            ),
            kind => write!(
                f,
                "{}(mu_max={},i_max={})",
                kind.name(),
                self.mu_max,
                self.i_max
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KINDS: [ScheduleKind; 5] = [
        ScheduleKind::Exponential,
        ScheduleKind::Linear,
        ScheduleKind::Cosine,
        ScheduleKind::Step,
        ScheduleKind::Constant,
    ];

    #[test]
    fn exponential_endpoints() {
        let s = Schedule::exponential(2000);
        assert_eq!(s.mu(0).unwrap(), 0.9);
        assert!((s.mu(2000).unwrap() - 4.086e-5).abs() < 1e-8);
        assert!(matches!(s.mu(2001), Err(Error::IterationOutOfRange { .. })));
    }

    #[test]
    fn linear_and_step_midpoints() {
        let lin = Schedule::new(ScheduleKind::Linear, 0.8, 0.0, 100).unwrap();
        assert!((lin.mu(50).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(lin.mu(100).unwrap(), 0.0);
        let step = Schedule::new(ScheduleKind::Step, 0.8, 0.0, 100).unwrap();
        assert_eq!(step.mu(49).unwrap(), 0.8);
        assert_eq!(step.mu(50).unwrap(), 0.0);
        let cos = Schedule::new(ScheduleKind::Cosine, 0.8, 0.0, 100).unwrap();
        assert!((cos.mu(50).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn all_kinds_start_at_max_and_never_increase() {
        for kind in KINDS {
            for i_max in [1, 7, 100] {
                let s = Schedule::new(kind, 0.7, 3.0, i_max).unwrap();
                assert_eq!(s.mu(0).unwrap(), 0.7);
                let mut prev = f64::INFINITY;
                for i in 0..=i_max {
                    let mu = s.mu(i).unwrap();
                    assert!((0.0..=0.7).contains(&mu));
                    assert!(mu <= prev);
                    prev = mu;
                }
            }
        }
    }

    #[test]
    fn validation() {
        assert!(Schedule::new(ScheduleKind::Linear, 1.2, 0.0, 10).is_err());
        assert!(Schedule::new(ScheduleKind::Linear, 0.5, 0.0, 0).is_err());
        assert!(Schedule::new(ScheduleKind::Exponential, 0.5, f64::NAN, 10).is_err());
        assert!(Schedule::baseline(10).is_baseline());
    }
}
