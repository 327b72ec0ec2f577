//! Row-major `2^n × 2^n` operator kernels.
//!
//! These act on raw buffers so the same code evolves states (Schrödinger
//! picture) and observables (Heisenberg picture, during adjoint gradients).

use num_complex::Complex64;

use super::pauli::PauliString;

pub(crate) type C = Complex64;

pub(crate) const ZERO: C = C::new(0.0, 0.0);

#[inline]
fn parity_sign(k: usize, z: u64) -> f64 {
    if (k as u64 & z).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `ρ ← U ρ U†` for a monomial unitary `U|k⟩ = w(k)|π(k)⟩`.
pub(crate) fn conj_monomial<F>(buf: &mut [C], n: usize, map: F)
where
    F: Fn(usize) -> (C, usize),
{
    let dim = 1usize << n;
    let table: Vec<(C, usize)> = (0..dim).map(&map).collect();
    let old = buf.to_vec();
    for r in 0..dim {
        let (wr, pr) = table[r];
        for c in 0..dim {
            let (wc, pc) = table[c];
            buf[pr * dim + pc] = wr * wc.conj() * old[r * dim + c];
        }
    }
}

/// `ρ ← M ρ M†` for a dense single-qubit matrix `m` on `qubit`.
pub(crate) fn conj_one_qubit(buf: &mut [C], n: usize, qubit: usize, m: [[C; 2]; 2]) {
    let dim = 1usize << n;
    let bit = 1usize << qubit;
    // left multiply, column by column
    for c in 0..dim {
        for r0 in (0..dim).filter(|r| r & bit == 0) {
            let r1 = r0 | bit;
            let a = buf[r0 * dim + c];
            let b = buf[r1 * dim + c];
            buf[r0 * dim + c] = m[0][0] * a + m[0][1] * b;
            buf[r1 * dim + c] = m[1][0] * a + m[1][1] * b;
        }
    }
    // right multiply by M†
    for r in 0..dim {
        let row = &mut buf[r * dim..(r + 1) * dim];
        for c0 in (0..dim).filter(|c| c & bit == 0) {
            let c1 = c0 | bit;
            let a = row[c0];
            let b = row[c1];
            row[c0] = a * m[0][0].conj() + b * m[0][1].conj();
            row[c1] = a * m[1][0].conj() + b * m[1][1].conj();
        }
    }
}

/// `ρ ← U ρ U†` with `U = cos(θ/2) I + i sin(θ/2) P`, `P` Hermitian.
pub(crate) fn rotate(buf: &mut [C], n: usize, p: &PauliString, angle: f64) {
    let dim = 1usize << n;
    let (s, c) = (angle / 2.0).sin_cos();
    let cc = c * c;
    let ss = s * s;
    let ics = C::new(0.0, c * s);
    let x = p.x_mask() as usize;
    let z = p.z_mask();
    let g = p.global_factor();
    let old = buf.to_vec();
    for r in 0..dim {
        let rx = r ^ x;
        let sr = parity_sign(r, z);
        let f_rx = g * parity_sign(rx, z);
        for col in 0..dim {
            let cx = col ^ x;
            let sc = parity_sign(col, z);
            let f_c = g * sc;
            let p_rho = f_rx * old[rx * dim + col];
            let rho_p = old[r * dim + cx] * f_c;
            let p_rho_p = old[rx * dim + cx] * (sr * sc);
            buf[r * dim + col] = old[r * dim + col] * cc + p_rho_p * ss + ics * (p_rho - rho_p);
        }
    }
}

/// `ρ ← (1 − w) ρ + w P ρ P`, `P` Hermitian. The Pauli channel with
/// `w = μ/2`; no range check on `w`.
pub(crate) fn pauli_mix(buf: &mut [C], n: usize, p: &PauliString, w: f64) {
    if w == 0.0 {
        return;
    }
    let dim = 1usize << n;
    let x = p.x_mask() as usize;
    let z = p.z_mask();
    if x == 0 {
        // diagonal P: entries with s(r)s(c) = -1 scale by (1 - 2w)
        for r in 0..dim {
            let sr = parity_sign(r, z);
            for col in 0..dim {
                if sr * parity_sign(col, z) < 0.0 {
                    buf[r * dim + col] *= 1.0 - 2.0 * w;
                }
            }
        }
        return;
    }
    let old = buf.to_vec();
    for r in 0..dim {
        let sr = parity_sign(r, z);
        let rx = r ^ x;
        for col in 0..dim {
            let sc = parity_sign(col, z);
            let prp = old[rx * dim + (col ^ x)] * (sr * sc);
            buf[r * dim + col] = old[r * dim + col] * (1.0 - w) + prp * w;
        }
    }
}

/// `Tr(ρ P)`.
pub(crate) fn trace_pauli(buf: &[C], n: usize, p: &PauliString) -> C {
    let dim = 1usize << n;
    let x = p.x_mask() as usize;
    let z = p.z_mask();
    let g = p.global_factor();
    let mut acc = ZERO;
    // (ρP)[k][k] = ρ[k][k⊕x] f(k)
    for k in 0..dim {
        acc += buf[k * dim + (k ^ x)] * parity_sign(k, z);
    }
    acc * g
}

/// `Tr(O P σ)`.
pub(crate) fn trace_o_p_sigma(o: &[C], sigma: &[C], n: usize, p: &PauliString) -> C {
    let dim = 1usize << n;
    let x = p.x_mask() as usize;
    let z = p.z_mask();
    let g = p.global_factor();
    let mut acc = ZERO;
    // (Pσ)[c][r] = f(c⊕x) σ[c⊕x][r]
    for c in 0..dim {
        let cx = c ^ x;
        let f = parity_sign(cx, z);
        let srow = &sigma[cx * dim..(cx + 1) * dim];
        let mut inner = ZERO;
        for r in 0..dim {
            inner += o[r * dim + c] * srow[r];
        }
        acc += inner * f;
    }
    acc * g
}
