//! Exact Fourier-mode extraction, the noise damping law and the heat-equation
//! residual check.
//!
//! When every parameter drives a single rotation, the loss is a trigonometric
//! polynomial of degree at most one in each angle:
//! `L(φ) = Σ_ω c_ω e^{iω·φ}` with `ω ∈ {−1, 0, 1}^m`. Noise at level μ damps each
//! term by `(1 − μ)^{order(ω)}`, where the order counts the nonzero entries.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{check_finite, check_mu, Error, Result};
use crate::paulisim::{Circuit, Hamiltonian};

pub const DEFAULT_MODE_CAP: usize = 8;
pub const MAX_MODE_CAP: usize = 12;
pub const PRUNE_TOL: f64 = 1e-12;
pub const DEFAULT_HEAT_STEP: f64 = 1e-3;

const IMAG_TOL: f64 = 1e-9;

/// The three grid angles per parameter; exact quadrature for frequencies {−1, 0, 1}.
pub const GRID: [f64; 3] = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrequencyVector(Vec<i8>);

impl FrequencyVector {
    pub fn new(omega: Vec<i8>) -> Result<Self> {
        if let Some(bad) = omega.iter().find(|w| !(-1..=1).contains(*w)) {
            return Err(Error::InvalidArgument(format!(
                "frequency entry {bad} outside {{-1, 0, 1}}"
            )));
        }
        Ok(Self(omega))
    }

    pub fn zero(m: usize) -> Self {
        Self(vec![0; m])
    }

    pub fn entries(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of nonzero entries.
    pub fn order(&self) -> usize {
        self.0.iter().filter(|&&w| w != 0).count()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|w| -w).collect())
    }

    pub fn dot(&self, phi: &[f64]) -> f64 {
        self.0.iter().zip(phi).map(|(&w, p)| w as f64 * p).sum()
    }
}

/// Signed-digit form, parameter 0 leftmost: `+0-` is `ω = (1, 0, −1)`.
impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for w in &self.0 {
            let ch = match w {
                1 => '+',
                -1 => '-',
                _ => '0',
            };
            write!(f, "{ch}")?;
        }
        Ok(())
    }
}

impl FromStr for FrequencyVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                '0' => Ok(0),
                other => Err(Error::InvalidArgument(format!(
                    "bad frequency digit {other:?} in {s:?}"
                ))),
            })
            .collect::<Result<Vec<i8>>>()
            .map(Self)
    }
}

/// Sparse Fourier coefficients of a loss over `m` parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierTable {
    m: usize,
    coeffs: BTreeMap<FrequencyVector, Complex64>,
}

impl FourierTable {
    pub fn new(m: usize, coeffs: BTreeMap<FrequencyVector, Complex64>) -> Result<Self> {
        if let Some(w) = coeffs.keys().find(|w| w.len() != m) {
            return Err(Error::InvalidArgument(format!(
                "frequency {w} has length {} but the table has m = {m}",
                w.len()
            )));
        }
        Ok(Self { m, coeffs })
    }

    /// Tabulates `f` on the `3^m` grid and inverts the per-parameter 3-point
    /// DFT. Exact whenever `f` has frequencies in {−1, 0, 1} per parameter.
    pub fn from_grid<F>(m: usize, cap: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<f64> + Sync,
    {
        let cap = cap.min(MAX_MODE_CAP);
        if m > cap {
            return Err(Error::CapExceeded { m, cap });
        }
        let size = 3usize.pow(m as u32);
        let samples: Vec<f64> = (0..size)
            .into_par_iter()
            .map(|idx| f(&grid_point(idx, m)))
            .collect::<Result<_>>()?;
        check_finite(&samples, "grid sample")?;

        let mut data: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        // Digit k of a flat index is the grid (or frequency) index of parameter k.
        let roots: [Complex64; 3] = std::array::from_fn(|j| Complex64::from_polar(1.0, -GRID[j]));
        for k in 0..m {
            let stride = 3usize.pow(k as u32);
            for base in 0..size {
                if !(base / stride).is_multiple_of(3) {
                    continue;
                }
                let v = [data[base], data[base + stride], data[base + 2 * stride]];
                for freq in 0..3 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, vj) in v.iter().enumerate() {
                        acc += vj * roots[(freq * j) % 3];
                    }
                    data[base + freq * stride] = acc / 3.0;
                }
            }
        }

        let mut coeffs = BTreeMap::new();
        for (idx, c) in data.into_iter().enumerate() {
            if c.norm() < PRUNE_TOL {
                continue;
            }
            let omega = (0..m)
                .map(|k| match (idx / 3usize.pow(k as u32)) % 3 {
                    0 => 0,
                    1 => 1,
                    _ => -1,
                })
                .collect();
            coeffs.insert(FrequencyVector(omega), c);
        }
        Ok(Self { m, coeffs })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn coeffs(&self) -> &BTreeMap<FrequencyVector, Complex64> {
        &self.coeffs
    }

    pub fn coeff(&self, omega: &FrequencyVector) -> Complex64 {
        self.coeffs.get(omega).copied().unwrap_or_default()
    }

    /// The φ-average of the loss.
    pub fn constant(&self) -> f64 {
        self.coeff(&FrequencyVector::zero(self.m)).re
    }

    /// Largest `|c_{−ω} − conj(c_ω)|`; zero for a real-valued loss.
    pub fn reality_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|(w, c)| (self.coeff(&w.negated()) - c.conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `Σ_ω c_ω e^{iω·φ}`.
    pub fn eval(&self, phi: &[f64]) -> Result<f64> {
        self.damped_eval(0.0, phi)
    }

    /// `Σ_ω (1 − μ)^{order(ω)} c_ω e^{iω·φ}`.
    pub fn damped_eval(&self, mu: f64, phi: &[f64]) -> Result<f64> {
        check_mu(mu)?;
        self.scaled_eval(1.0 - mu, phi)
    }

    fn scaled_eval(&self, lambda: f64, phi: &[f64]) -> Result<f64> {
        if phi.len() != self.m {
            return Err(Error::ParamLength {
                expected: self.m,
                got: phi.len(),
            });
        }
        check_finite(phi, "fourier angle")?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (w, c) in &self.coeffs {
            let damp = lambda.powi(w.order() as i32);
            acc += c * Complex64::from_polar(damp, w.dot(phi));
        }
        if acc.im.abs() > IMAG_TOL {
            return Err(Error::InvalidArgument(format!(
                "reconstruction has imaginary residue {:e}",
                acc.im
            )));
        }
        Ok(acc.re)
    }

    /// Table with each order-`k` coefficient multiplied by `λ^k`.
    pub fn scale_orders(&self, lambda: f64) -> FourierTable {
        self.map(|w, c| c * lambda.powi(w.order() as i32))
    }

    /// Table of `Δ_φ L`: each mode is an eigenfunction with eigenvalue `−order(ω)`.
    pub fn laplacian(&self) -> FourierTable {
        self.map(|w, c| c * -(w.order() as f64))
    }

    fn map<F: Fn(&FrequencyVector, Complex64) -> Complex64>(&self, f: F) -> FourierTable {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(w, &c)| (w.clone(), f(w, c)))
            .filter(|(_, c)| c.norm() >= PRUNE_TOL)
            .collect();
        FourierTable { m: self.m, coeffs }
    }

    /// Total `Σ|c_ω|²` per order.
    pub fn mode_spectrum(&self) -> BTreeMap<usize, f64> {
        let mut out = BTreeMap::new();
        for (w, c) in &self.coeffs {
            *out.entry(w.order()).or_insert(0.0) += c.norm_sqr();
        }
        out
    }

    /// CSV with columns `omega,re,im,order`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["omega", "re", "im", "order"])?;
        for (w, c) in &self.coeffs {
            wtr.write_record([
                w.to_string(),
                c.re.to_string(),
                c.im.to_string(),
                w.order().to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn grid_point(mut idx: usize, m: usize) -> Vec<f64> {
    let mut phi = Vec::with_capacity(m);
    for _ in 0..m {
        phi.push(GRID[idx % 3]);
        idx /= 3;
    }
    phi
}

fn require_unit_frequencies(c: &Circuit) -> Result<()> {
    match c.first_non_unit_param() {
        Some(k) => Err(Error::SharedParameter(k)),
        None => Ok(()),
    }
}

/// Fourier table of the noiseless loss `Tr(H C(φ)|0⟩⟨0|C(φ)†)`.
pub fn extract_modes(c: &Circuit, h: &Hamiltonian) -> Result<FourierTable> {
    extract_modes_capped(c, h, DEFAULT_MODE_CAP)
}

/// As [`extract_modes`] with a custom parameter cap (at most 12).
pub fn extract_modes_capped(c: &Circuit, h: &Hamiltonian, cap: usize) -> Result<FourierTable> {
    require_unit_frequencies(c)?;
    FourierTable::from_grid(c.num_params(), cap, |phi| c.expectation(h, phi, 0.0))
}

/// `|∂_t L − Δ_φ L|` for the noisy loss at `μ(t) = 1 − e^{−t}`, by
/// second-order finite differences of step `step` in `t` and every angle.
/// Near `t = 0` the time derivative switches to a one-sided stencil.
pub fn heat_residual(c: &Circuit, h: &Hamiltonian, phi: &[f64], t: f64, step: f64) -> Result<f64> {
    require_unit_frequencies(c)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "heat time must be >= 0, got {t}"
        )));
    }
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "step must be > 0, got {step}"
        )));
    }
    let loss = |phi: &[f64], t: f64| c.expectation(h, phi, -(-t).exp_m1());
    let centre = loss(phi, t)?;
    let dt = if t >= step {
        (loss(phi, t + step)? - loss(phi, t - step)?) / (2.0 * step)
    } else {
        (-3.0 * centre + 4.0 * loss(phi, t + step)? - loss(phi, t + 2.0 * step)?) / (2.0 * step)
    };
    let mut lap = 0.0;
    let mut shifted = phi.to_vec();
    for k in 0..phi.len() {
        shifted[k] = phi[k] + step;
        let plus = loss(&shifted, t)?;
        shifted[k] = phi[k] - step;
        let minus = loss(&shifted, t)?;
        shifted[k] = phi[k];
        lap += (plus - 2.0 * centre + minus) / (step * step);
    }
    Ok((dt - lap).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paulisim::random::{random_circuit, random_hamiltonian};
    use crate::paulisim::PauliString;
    use crate::seed::{rng_from_seed, uniform_angles};
    use proptest::prelude::*;

    fn single_x() -> (Circuit, Hamiltonian) {
        let p: PauliString = "X".parse().unwrap();
        (
            Circuit::builder(1).rotation(p, 0).build().unwrap(),
            Hamiltonian::z(1, 0).unwrap(),
        )
    }

    fn fv(s: &str) -> FrequencyVector {
        s.parse().unwrap()
    }

    #[test]
    fn single_rotation_is_cosine() {
        let (c, h) = single_x();
        let t = extract_modes(&c, &h).unwrap();
        assert_eq!(t.coeffs().len(), 2);
        assert!((t.coeff(&fv("+")) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((t.coeff(&fv("-")) - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert_eq!(t.constant(), 0.0);
        let spec = t.mode_spectrum();
        assert!((spec[&1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rotation_free_circuit_is_constant() {
        let c = Circuit::builder(2)
            .h(0)
            .unwrap()
            .cx(0, 1)
            .unwrap()
            .build()
            .unwrap();
        let h = Hamiltonian::new(2, vec![(0.8, "ZZ".parse().unwrap())]).unwrap();
        let t = extract_modes(&c, &h).unwrap();
        assert_eq!(t.m(), 0);
        assert_eq!(t.coeffs().len(), 1);
        assert!((t.constant() - 0.8).abs() < 1e-14);
        assert!((t.mode_spectrum()[&0] - 0.64).abs() < 1e-14);
        assert_eq!(heat_residual(&c, &h, &[], 0.4, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn reconstruction_and_damping_match_simulation() {
        let mut rng = rng_from_seed(21);
        let c = random_circuit(3, 3, &mut rng).unwrap();
        let h = random_hamiltonian(3, 4, &mut rng).unwrap();
        let t = extract_modes(&c, &h).unwrap();
        assert!(t.reality_defect() < 1e-10);
        for _ in 0..50 {
            let phi = uniform_angles(&mut rng, 3);
            let direct = c.expectation(&h, &phi, 0.0).unwrap();
            assert!((t.eval(&phi).unwrap() - direct).abs() < 1e-9);
            let noisy = c.expectation(&h, &phi, 0.37).unwrap();
            assert!((t.damped_eval(0.37, &phi).unwrap() - noisy).abs() < 1e-9);
            assert!((t.damped_eval(1.0, &phi).unwrap() - t.constant()).abs() < 1e-12);
        }
    }

    #[test]
    fn homogeneity_and_laplacian() {
        let mut rng = rng_from_seed(22);
        let c = random_circuit(2, 4, &mut rng).unwrap();
        let h = random_hamiltonian(2, 3, &mut rng).unwrap();
        let t = extract_modes(&c, &h).unwrap();
        let scaled = t.scale_orders(0.6);
        let lap = t.laplacian();
        let step = 1e-4;
        for _ in 0..10 {
            let phi = uniform_angles(&mut rng, 4);
            let a = scaled.eval(&phi).unwrap();
            let b = t.damped_eval(0.4, &phi).unwrap();
            assert!((a - b).abs() < 1e-12);
            // finite-difference Laplacian of the reconstruction
            let centre = t.eval(&phi).unwrap();
            let mut fd = 0.0;
            for k in 0..4 {
                let mut p = phi.clone();
                p[k] += step;
                let plus = t.eval(&p).unwrap();
                p[k] -= 2.0 * step;
                let minus = t.eval(&p).unwrap();
                fd += (plus - 2.0 * centre + minus) / (step * step);
            }
            assert!((lap.eval(&phi).unwrap() - fd).abs() < 1e-5);
        }
    }

    #[test]
    fn single_mode_laplacian_eigenvalue() {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(fv("+0-"), Complex64::new(0.3, 0.1));
        coeffs.insert(fv("-0+"), Complex64::new(0.3, -0.1));
        let t = FourierTable::new(3, coeffs).unwrap();
        let lap = t.laplacian();
        for (w, c) in lap.coeffs() {
            assert_eq!(*c, t.coeff(w) * -2.0);
        }
    }

    #[test]
    fn parseval_against_monte_carlo() {
        let mut rng = rng_from_seed(23);
        let c = random_circuit(3, 4, &mut rng).unwrap();
        let h = random_hamiltonian(3, 3, &mut rng).unwrap();
        let t = extract_modes(&c, &h).unwrap();
        let weight: f64 = t.mode_spectrum().values().sum();
        let samples = 20_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..samples {
            let phi = uniform_angles(&mut rng, 4);
            let l2 = c.expectation(&h, &phi, 0.0).unwrap().powi(2);
            sum += l2;
            sum_sq += l2 * l2;
        }
        let mean = sum / samples as f64;
        let sem = ((sum_sq / samples as f64 - mean * mean) / samples as f64).sqrt();
        assert!(
            (mean - weight).abs() < 5.0 * sem + 1e-12,
            "{mean} vs {weight} (sem {sem})"
        );
    }

    #[test]
    fn heat_residuals_small() {
        let (c, h) = single_x();
        for &(phi, t) in &[(0.3, 0.0), (1.2, 0.5), (-2.0, 2.0)] {
            assert!(heat_residual(&c, &h, &[phi], t, 1e-3).unwrap() < 1e-5);
        }
        let mut rng = rng_from_seed(24);
        let c = random_circuit(3, 3, &mut rng).unwrap();
        let h = random_hamiltonian(3, 3, &mut rng).unwrap();
        for _ in 0..5 {
            let phi = uniform_angles(&mut rng, 3);
            let t = rand::Rng::random_range(&mut rng, 0.0..3.0);
            assert!(heat_residual(&c, &h, &phi, t, 1e-3).unwrap() < 1e-4);
        }
        assert!(heat_residual(&c, &h, &[0.0; 3], -0.1, 1e-3).is_err());
    }

    #[test]
    fn guards() {
        let mut rng = rng_from_seed(25);
        let c = random_circuit(1, 9, &mut rng).unwrap();
        let h = Hamiltonian::z(1, 0).unwrap();
        assert!(matches!(
            extract_modes(&c, &h),
            Err(Error::CapExceeded { m: 9, cap: 8 })
        ));
        let shared = Circuit::builder(1)
            .rotation("X".parse().unwrap(), 0)
            .rotation("Y".parse().unwrap(), 0)
            .build()
            .unwrap();
        assert!(matches!(
            extract_modes(&shared, &h),
            Err(Error::SharedParameter(0))
        ));
        let (c, h) = single_x();
        let t = extract_modes(&c, &h).unwrap();
        assert!(t.damped_eval(1.5, &[0.0]).is_err());
        assert!(t.eval(&[0.0, 1.0]).is_err());
        assert!("+x".parse::<FrequencyVector>().is_err());
    }

    #[test]
    fn csv_export() {
        let (c, h) = single_x();
        let t = extract_modes(&c, &h).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "omega,re,im,order");
        assert_eq!(text.lines().count(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn tables_are_real_and_reconstruct(seed in any::<u64>(), n in 1usize..=3, m in 0usize..=4) {
            let mut rng = rng_from_seed(seed);
            let c = random_circuit(n, m, &mut rng).unwrap();
            let h = random_hamiltonian(n, 2, &mut rng).unwrap();
            let t = extract_modes(&c, &h).unwrap();
            prop_assert!(t.reality_defect() < 1e-10);
            prop_assert!(t.coeffs().keys().all(|w| w.order() <= m));
            let phi = uniform_angles(&mut rng, m);
            let mu = rand::Rng::random_range(&mut rng, 0.0..=1.0);
            let direct = c.expectation(&h, &phi, mu).unwrap();
            prop_assert!((t.damped_eval(mu, &phi).unwrap() - direct).abs() < 1e-9);
        }
    }
}
