//! JSON interchange format for circuits and their observables.
//!
//! ```json
//! {
//!   "n": 2,
//!   "m": 1,
//!   "pauli_order": "qubit 0 = rightmost character",
//!   "ops": [
//!     {"kind": "h", "targets": [0]},
//!     {"kind": "rotation", "pauli": "XZ", "param_index": 0},
//!     {"kind": "noise", "pauli": "XZ"}
//!   ],
//!   "observable": [{"coeff": 1.0, "pauli": "IZ"}]
//! }
//! ```
//!
//! Rotations may carry an optional `"scale"` (default 1). `m` defaults to
//! one more than the largest parameter index; the observable defaults to Z
//! on qubit 0.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::circuit::{Circuit, CircuitOp};
use super::gates::{CliffordGate, CliffordKind};
use super::pauli::{Hamiltonian, PauliString};
use crate::error::{Error, Result};

pub const PAULI_ORDER: &str = "qubit 0 = rightmost character";

#[derive(Debug, Serialize, Deserialize)]
struct CircuitDoc {
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    m: Option<usize>,
    #[serde(default = "default_order")]
    pauli_order: String,
    ops: Vec<OpDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    observable: Option<Vec<TermDoc>>,
}

fn default_order() -> String {
    PAULI_ORDER.to_string()
}

#[derive(Debug, Serialize, Deserialize)]
struct OpDoc {
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pauli: Option<PauliString>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    param_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    scale: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TermDoc {
    coeff: f64,
    pauli: PauliString,
}

/// A circuit together with the observable its loss measures.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitFile {
    pub circuit: Circuit,
    pub observable: Hamiltonian,
}

impl CircuitFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CircuitDoc = serde_json::from_str(text)?;
        if doc.pauli_order != PAULI_ORDER {
            return Err(Error::InvalidCircuit(format!(
                "unsupported pauli_order {:?}; expected {PAULI_ORDER:?}",
                doc.pauli_order
            )));
        }
        let mut ops = Vec::with_capacity(doc.ops.len());
        for (i, op) in doc.ops.into_iter().enumerate() {
            let need_pauli = |p: Option<PauliString>| {
                p.ok_or_else(|| {
                    Error::InvalidCircuit(format!("op {i} ({}) needs a pauli", op.kind))
                })
            };
            let parsed = match op.kind.as_str() {
                "rotation" => CircuitOp::Rotation {
                    pauli: need_pauli(op.pauli)?,
                    param: op.param_index.ok_or_else(|| {
                        Error::InvalidCircuit(format!("op {i} (rotation) needs a param_index"))
                    })?,
                    scale: op.scale.unwrap_or(1.0),
                },
                "noise" => CircuitOp::Noise {
                    pauli: need_pauli(op.pauli)?,
                },
                other => {
                    let kind = CliffordKind::from_name(other).ok_or_else(|| {
                        Error::InvalidCircuit(format!("op {i}: unknown kind {other:?}"))
                    })?;
                    CircuitOp::Clifford(CliffordGate::new(kind, &op.targets)?)
                }
            };
            ops.push(parsed);
        }
        let m = doc.m.unwrap_or_else(|| {
            ops.iter()
                .filter_map(|op| match op {
                    CircuitOp::Rotation { param, .. } => Some(param + 1),
                    _ => None,
                })
                .max()
                .unwrap_or(0)
        });
        let circuit = Circuit::new(doc.n, m, ops)?;
        let observable = match doc.observable {
            Some(terms) => Hamiltonian::new(
                doc.n,
                terms.into_iter().map(|t| (t.coeff, t.pauli)).collect(),
            )?,
            None => Hamiltonian::z(doc.n, 0)?,
        };
        Ok(Self {
            circuit,
            observable,
        })
    }

    pub fn to_json(&self) -> String {
        let ops = self
            .circuit
            .ops()
            .iter()
            .map(|op| match op {
                CircuitOp::Clifford(g) => OpDoc {
                    kind: g.kind().name().to_string(),
                    targets: g.targets().to_vec(),
                    pauli: None,
                    param_index: None,
                    scale: None,
                },
                CircuitOp::Rotation {
                    pauli,
                    param,
                    scale,
                } => OpDoc {
                    kind: "rotation".into(),
                    targets: Vec::new(),
                    pauli: Some(*pauli),
                    param_index: Some(*param),
                    scale: (*scale != 1.0).then_some(*scale),
                },
                CircuitOp::Noise { pauli } => OpDoc {
                    kind: "noise".into(),
                    targets: Vec::new(),
                    pauli: Some(*pauli),
                    param_index: None,
                    scale: None,
                },
            })
            .collect();
        let doc = CircuitDoc {
            n: self.circuit.n(),
            m: Some(self.circuit.num_params()),
            pauli_order: PAULI_ORDER.to_string(),
            ops,
            observable: Some(
                self.observable
                    .terms()
                    .iter()
                    .map(|(c, p)| TermDoc {
                        coeff: *c,
                        pauli: *p,
                    })
                    .collect(),
            ),
        };
        serde_json::to_string_pretty(&doc).expect("circuit document serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}
