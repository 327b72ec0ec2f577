//! Pauli strings in symplectic form and real-weighted Pauli sums.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register a [`PauliString`] can address (two `u64` masks).
pub const MAX_QUBITS: usize = 63;

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// An n-qubit Pauli operator `i^phase_exp · ⊗_q σ(x_q, z_q)` with `σ(1,1) = Y`.
///
/// Qubit 0 is the least-significant bit of both masks and of computational
/// basis indices. The text form lists the most-significant qubit first, so
/// qubit 0 is the rightmost character (`"XI"` is X on qubit 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliString {
    pub fn new(n: usize, x_mask: u64, z_mask: u64, phase_exp: u8) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::InvalidPauli(format!(
                "{n} qubits exceeds {MAX_QUBITS}"
            )));
        }
        let valid = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if (x_mask | z_mask) & !valid != 0 {
            return Err(Error::InvalidPauli(format!(
                "mask bits set beyond qubit {}",
                n.saturating_sub(1)
            )));
        }
        Ok(Self {
            n,
            x: x_mask,
            z: z_mask,
            phase: phase_exp % 4,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            x: 0,
            z: 0,
            phase: 0,
        }
    }

    /// `pauli` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, pauli: Pauli) -> Result<Self> {
        Self::from_sites(n, &[(qubit, pauli)])
    }

    /// Product of single-qubit Paulis on distinct sites.
    pub fn from_sites(n: usize, sites: &[(usize, Pauli)]) -> Result<Self> {
        let mut x = 0u64;
        let mut z = 0u64;
        for &(q, p) in sites {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
            if (x | z) >> q & 1 == 1 {
                return Err(Error::InvalidPauli(format!("qubit {q} listed twice")));
            }
            let (bx, bz) = p.bits();
            x |= u64::from(bx) << q;
            z |= u64::from(bz) << q;
        }
        Self::new(n, x, z, 0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn pauli_at(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x >> qubit & 1 == 1, self.z >> qubit & 1 == 1)
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Hermitian iff the overall phase is ±1.
    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// Same operator with phase reset to +1.
    pub fn unsigned(&self) -> Self {
        Self { phase: 0, ..*self }
    }

    /// Symplectic inner product test.
    pub fn commutes(&self, other: &PauliString) -> Result<bool> {
        self.check_same_n(other)?;
        Ok(((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2))
    }

    /// Operator product `self · other`.
    pub fn mul(&self, other: &PauliString) -> Result<PauliString> {
        self.check_same_n(other)?;
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // σ(x,z) = i^{xz} X^x Z^z; moving Z^{z1} past X^{x2} costs (-1)^{z1·x2}.
        let e = u32::from(self.phase)
            + u32::from(other.phase)
            + (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 3 * (x & z).count_ones();
        Ok(PauliString {
            n: self.n,
            x,
            z,
            phase: (e % 4) as u8,
        })
    }

    /// Global factor `i^{phase + |x∧z|}` of the basis action.
    pub(crate) fn global_factor(&self) -> Complex64 {
        i_pow(u32::from(self.phase) + (self.x & self.z).count_ones())
    }

    /// `P|b⟩ = factor · |b ⊕ x⟩`.
    pub fn apply_to_basis(&self, b: usize) -> (Complex64, usize) {
        let sign = if (b as u64 & self.z).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        (self.global_factor() * sign, b ^ self.x as usize)
    }

    fn check_same_n(&self, other: &PauliString) -> Result<()> {
        if self.n != other.n {
            return Err(Error::QubitMismatch(self.n, other.n));
        }
        Ok(())
    }
}

pub(crate) fn i_pow(e: u32) -> Complex64 {
    match e % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in (0..self.n).rev() {
            write!(f, "{}", self.pauli_at(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `[+|-][i]` followed by characters from `IXYZ`, most-significant
    /// qubit first.
    fn from_str(s: &str) -> Result<Self> {
        let mut rest = s.trim();
        let mut phase = 0u8;
        if let Some(r) = rest.strip_prefix('-') {
            phase += 2;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        if let Some(r) = rest.strip_prefix('i') {
            phase += 1;
            rest = r;
        }
        let n = rest.chars().count();
        if n == 0 {
            return Err(Error::InvalidPauli(format!("{s:?} has no sites")));
        }
        let mut sites = Vec::with_capacity(n);
        for (pos, ch) in rest.chars().enumerate() {
            let p = match ch {
                'I' => continue,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => {
                    return Err(Error::InvalidPauli(format!(
                        "bad character {ch:?} in {s:?}"
                    )))
                }
            };
            sites.push((n - 1 - pos, p));
        }
        let mut p = PauliString::from_sites(n, &sites)?;
        p.phase = phase % 4;
        Ok(p)
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Real-weighted sum of Hermitian Pauli strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hamiltonian {
    n: usize,
    terms: Vec<(f64, PauliString)>,
}

impl Hamiltonian {
    pub fn new(n: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        for (c, p) in &terms {
            if p.n() != n {
                return Err(Error::QubitMismatch(n, p.n()));
            }
            if !c.is_finite() {
                return Err(Error::NonFinite("hamiltonian coefficient"));
            }
            if !p.is_hermitian() {
                return Err(Error::NonHermitian(p.to_string()));
            }
        }
        Ok(Self { n, terms })
    }

    pub fn single(coefficient: f64, p: PauliString) -> Result<Self> {
        Self::new(p.n(), vec![(coefficient, p)])
    }

    /// `Z` on one qubit.
    pub fn z(n: usize, qubit: usize) -> Result<Self> {
        Self::single(1.0, PauliString::single(n, qubit, Pauli::Z)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// Row-major dense matrix, used as the starting Heisenberg observable.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let dim = 1usize << self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
        for (c, p) in &self.terms {
            for col in 0..dim {
                let (f, row) = p.apply_to_basis(col);
                out[row * dim + col] += f * *c;
            }
        }
        out
    }
}
