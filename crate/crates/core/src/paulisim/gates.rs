use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::kernel::C;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CliffordKind {
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    Cx,
    Cz,
    Swap,
}

impl CliffordKind {
    pub fn arity(self) -> usize {
        match self {
            CliffordKind::Cx | CliffordKind::Cz | CliffordKind::Swap => 2,
            _ => 1,
        }
    }

    pub fn inverse(self) -> Self {
        match self {
            CliffordKind::S => CliffordKind::Sdg,
            CliffordKind::Sdg => CliffordKind::S,
            k => k,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CliffordKind::H => "h",
            CliffordKind::S => "s",
            CliffordKind::Sdg => "sdg",
            CliffordKind::X => "x",
            CliffordKind::Y => "y",
            CliffordKind::Z => "z",
            CliffordKind::Cx => "cx",
            CliffordKind::Cz => "cz",
            CliffordKind::Swap => "swap",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name.to_ascii_lowercase().as_str() {
            "h" => CliffordKind::H,
            "s" => CliffordKind::S,
            "sdg" => CliffordKind::Sdg,
            "x" => CliffordKind::X,
            "y" => CliffordKind::Y,
            "z" => CliffordKind::Z,
            "cx" | "cnot" => CliffordKind::Cx,
            "cz" => CliffordKind::Cz,
            "swap" => CliffordKind::Swap,
            _ => return None,
        })
    }
}

/// A fixed Clifford gate. For `Cx` the first target is the control.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CliffordGate {
    kind: CliffordKind,
    targets: Vec<usize>,
}

impl CliffordGate {
    pub fn new(kind: CliffordKind, targets: &[usize]) -> Result<Self> {
        if targets.len() != kind.arity() {
            return Err(Error::InvalidCircuit(format!(
                "{} takes {} target(s), got {}",
                kind.name(),
                kind.arity(),
                targets.len()
            )));
        }
        if kind.arity() == 2 && targets[0] == targets[1] {
            return Err(Error::InvalidCircuit(format!(
                "{} targets must differ",
                kind.name()
            )));
        }
        Ok(Self {
            kind,
            targets: targets.to_vec(),
        })
    }

    pub fn kind(&self) -> CliffordKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn inverse(&self) -> Self {
        Self {
            kind: self.kind.inverse(),
            targets: self.targets.clone(),
        }
    }

    pub(crate) fn check_register(&self, n: usize) -> Result<()> {
        match self.targets.iter().find(|&&q| q >= n) {
            Some(&q) => Err(Error::QubitOutOfRange { qubit: q, n }),
            None => Ok(()),
        }
    }

    /// Basis action `U|k⟩ = w(k)|π(k)⟩`; `None` for `H`.
    pub(crate) fn monomial(&self, k: usize) -> Option<(C, usize)> {
        let one = C::new(1.0, 0.0);
        let t0 = self.targets[0];
        let b0 = k >> t0 & 1;
        Some(match self.kind {
            CliffordKind::H => return None,
            CliffordKind::X => (one, k ^ (1 << t0)),
            CliffordKind::Y => {
                let w = if b0 == 0 {
                    C::new(0.0, 1.0)
                } else {
                    C::new(0.0, -1.0)
                };
                (w, k ^ (1 << t0))
            }
            CliffordKind::Z => (if b0 == 0 { one } else { -one }, k),
            CliffordKind::S => (if b0 == 0 { one } else { C::new(0.0, 1.0) }, k),
            CliffordKind::Sdg => (if b0 == 0 { one } else { C::new(0.0, -1.0) }, k),
            CliffordKind::Cx => {
                let t1 = self.targets[1];
                (one, if b0 == 1 { k ^ (1 << t1) } else { k })
            }
            CliffordKind::Cz => {
                let b1 = k >> self.targets[1] & 1;
                (if b0 & b1 == 1 { -one } else { one }, k)
            }
            CliffordKind::Swap => {
                let t1 = self.targets[1];
                let b1 = k >> t1 & 1;
                let cleared = k & !(1 << t0) & !(1 << t1);
                (one, cleared | b0 << t1 | b1 << t0)
            }
        })
    }

    pub(crate) fn hadamard_matrix() -> [[C; 2]; 2] {
        let h = C::new(FRAC_1_SQRT_2, 0.0);
        [[h, h], [h, -h]]
    }
}

impl fmt::Display for CliffordGate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        for t in &self.targets {
            write!(f, " q{t}")?;
        }
        Ok(())
    }
}
