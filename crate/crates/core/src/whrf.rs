//! Wishart hypertoroidal random fields `L(φ) = wᵀ(φ) W w(φ)` with
//! `w(φ) = ⊗_k (cos φ_k/2, sin φ_k/2)` and `W = X Xᵀ / d`.
//!
//! Index convention: bit `k` of a row/column index of `W` is the factor
//! belonging to parameter `k` (parameter 0 is the least significant bit).
//!
//! The regularized loss replaces each factor product `w_i(φ_k) w_j(φ_k)` by
//! `w_ij(λ, φ_k)`: `(1 + λ cos φ)/2`, `λ sin φ / 2`, `(1 − λ cos φ)/2`. This
//! damps Fourier modes of order `k` by `λ^k`, so optimizers drive it with
//! `λ = 1 − μ`.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_finite, Error, Result};
use crate::fourier::FourierTable;
use crate::optim::{multistart, AdamConfig, ParametricLoss, RunOptions, Schedule};
use crate::seed::{derive_seed, rng_from_seed, uniform_angles};

pub const DEFAULT_WHRF_CAP: usize = 12;
/// Mode-damping checks tabulate `3^m` points; kept to small fields.
pub const MODE_CHECK_MAX_M: usize = 6;
pub const HISTOGRAM_BINS: usize = 100;
/// Number of lowest bins counted by [`low_bin_fraction`] (5% of 100).
pub const LOW_BINS: usize = 5;

/// A sampled (or supplied) Wishart matrix over `m` parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct WishartField {
    m: usize,
    d: usize,
    seed: Option<u64>,
    w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub m: usize,
    pub d: usize,
    pub gamma: Option<f64>,
    pub seed: Option<u64>,
    pub real_or_complex: String,
}

impl WishartField {
    /// `W = X Xᵀ / d` with `X` a `2^m × d` matrix of i.i.d. standard normals,
    /// drawn row-major from the ChaCha stream of `seed`.
    pub fn sample(m: usize, d: usize, seed: u64) -> Result<Self> {
        Self::sample_capped(m, d, seed, DEFAULT_WHRF_CAP)
    }

    pub fn sample_capped(m: usize, d: usize, seed: u64, cap: usize) -> Result<Self> {
        if m > cap {
            return Err(Error::CapExceeded { m, cap });
        }
        if d == 0 {
            return Err(Error::InvalidArgument(
                "wishart degrees of freedom must be >= 1".into(),
            ));
        }
        let dim = 1usize << m;
        let mut rng = rng_from_seed(seed);
        let x: Vec<f64> = (0..dim * d)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let mut w = vec![0.0; dim * dim];
        for i in 0..dim {
            let xi = &x[i * d..(i + 1) * d];
            for j in i..dim {
                let xj = &x[j * d..(j + 1) * d];
                let v = xi.iter().zip(xj).map(|(a, b)| a * b).sum::<f64>() / d as f64;
                w[i * dim + j] = v;
                w[j * dim + i] = v;
            }
        }
        Ok(Self {
            m,
            d,
            seed: Some(seed),
            w,
        })
    }

    /// A field from an explicit symmetric `2^m × 2^m` row-major matrix.
    pub fn from_matrix(m: usize, w: Vec<f64>) -> Result<Self> {
        if m > DEFAULT_WHRF_CAP {
            return Err(Error::CapExceeded {
                m,
                cap: DEFAULT_WHRF_CAP,
            });
        }
        let dim = 1usize << m;
        if w.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "matrix has {} entries, expected {}",
                w.len(),
                dim * dim
            )));
        }
        check_finite(&w, "wishart matrix entry")?;
        for i in 0..dim {
            for j in 0..i {
                if w[i * dim + j] != w[j * dim + i] {
                    return Err(Error::InvalidArgument(format!(
                        "matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self {
            m,
            d: 0,
            seed: None,
            w,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Degrees of freedom; 0 for a supplied matrix.
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Overparametrization ratio `m / (2d)`.
    pub fn gamma(&self) -> Option<f64> {
        (self.d > 0).then(|| self.m as f64 / (2.0 * self.d as f64))
    }

    pub fn matrix(&self) -> &[f64] {
        &self.w
    }

    pub fn dim(&self) -> usize {
        1 << self.m
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.w[i * self.dim() + i]).sum()
    }

    /// φ-average of the loss, `Tr(W) / 2^m`.
    pub fn mean_loss(&self) -> f64 {
        self.trace() / self.dim() as f64
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let dim = self.dim();
        let mat = nalgebra::DMatrix::from_row_slice(dim, dim, &self.w);
        mat.symmetric_eigenvalues().min()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            w: self.w.iter().map(|v| v * c).collect(),
            ..self.clone()
        }
    }

    pub fn meta(&self) -> InstanceMeta {
        InstanceMeta {
            m: self.m,
            d: self.d,
            gamma: self.gamma(),
            seed: self.seed,
            real_or_complex: "real".into(),
        }
    }

    fn check_phi(&self, phi: &[f64]) -> Result<()> {
        if phi.len() != self.m {
            return Err(Error::ParamLength {
                expected: self.m,
                got: phi.len(),
            });
        }
        check_finite(phi, "whrf angle")
    }

    /// `wᵀ(φ) W w(φ)`.
    pub fn loss(&self, phi: &[f64]) -> Result<f64> {
        self.check_phi(phi)?;
        let dim = self.dim();
        let mut w = vec![1.0; dim];
        for (k, &p) in phi.iter().enumerate() {
            let (s, c) = (p / 2.0).sin_cos();
            for (idx, v) in w.iter_mut().enumerate() {
                *v *= if idx >> k & 1 == 0 { c } else { s };
            }
        }
        Ok(self
            .w
            .par_chunks(dim)
            .zip(&w)
            .map(|(row, wi)| wi * row.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>())
            .sum())
    }

    /// `Σ_{I,J} W_IJ Π_k w_{i_k j_k}(λ, φ_k)`, contracting one parameter at a
    /// time from the most significant bit down.
    pub fn loss_reg(&self, phi: &[f64], lambda: f64) -> Result<f64> {
        self.check_phi(phi)?;
        check_lambda(lambda)?;
        let mut cur = self.w.clone();
        for k in (0..self.m).rev() {
            let a = factor_matrix(phi[k], lambda);
            let half = 1usize << k;
            let dim = half << 1;
            let mut next = vec![0.0; half * half];
            for i in 0..half {
                for j in 0..half {
                    let mut acc = 0.0;
                    for (bi, row) in a.iter().enumerate() {
                        for (bj, &f) in row.iter().enumerate() {
                            acc += f * cur[(bi * half + i) * dim + bj * half + j];
                        }
                    }
                    next[i * half + j] = acc;
                }
            }
            cur = next;
        }
        Ok(cur[0])
    }

    /// Exact gradient of [`WishartField::loss_reg`] by the two-term shift rule.
    pub fn grad(&self, phi: &[f64], lambda: f64) -> Result<Vec<f64>> {
        self.check_phi(phi)?;
        let mut shifted = phi.to_vec();
        let mut g = Vec::with_capacity(self.m);
        for k in 0..self.m {
            shifted[k] = phi[k] + std::f64::consts::FRAC_PI_2;
            let plus = self.loss_reg(&shifted, lambda)?;
            shifted[k] = phi[k] - std::f64::consts::FRAC_PI_2;
            let minus = self.loss_reg(&shifted, lambda)?;
            shifted[k] = phi[k];
            g.push((plus - minus) / 2.0);
        }
        Ok(g)
    }

    /// Rewrites `W` in the per-parameter basis `{1, λ cos φ_k, λ sin φ_k}`.
    pub fn compile(&self) -> WhrfLandscape {
        // Each 2×2 block [[a, b], [b', e]] contributes
        //   (a + e)/2 · 1 + (a − e)/2 · λ cos φ + (b + b')/2 · λ sin φ.
        let mut cur = self.w.clone();
        let mut low_dim = 1usize; // 3^(processed params)
        for k in (0..self.m).rev() {
            let half = 1usize << k;
            let dim = half << 1;
            let mut next = vec![0.0; half * half * low_dim * 3];
            // cur layout: [row (dim)][col (dim)][low (low_dim)]
            for i in 0..half {
                for j in 0..half {
                    for l in 0..low_dim {
                        let at = |bi: usize, bj: usize| {
                            cur[((bi * half + i) * dim + bj * half + j) * low_dim + l]
                        };
                        let (a, b, b2, e) = (at(0, 0), at(0, 1), at(1, 0), at(1, 1));
                        let base = ((i * half + j) * 3) * low_dim;
                        // the new digit becomes the most significant of `low`
                        next[base + l] = (a + e) / 2.0;
                        next[base + low_dim + l] = (a - e) / 2.0;
                        next[base + 2 * low_dim + l] = (b + b2) / 2.0;
                    }
                }
            }
            cur = next;
            low_dim *= 3;
        }
        // Digits were pushed from parameter m−1 down to 0, each new one most
        // significant, so parameter 0 ends up most significant; reverse.
        let tensor = reverse_base3_digits(&cur, self.m);
        WhrfLandscape { m: self.m, tensor }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidArgument(format!(
            "lambda {lambda} outside [0, 1]"
        )));
    }
    Ok(())
}

fn factor_matrix(phi: f64, lambda: f64) -> [[f64; 2]; 2] {
    let (s, c) = phi.sin_cos();
    let off = lambda * s / 2.0;
    [
        [(1.0 + lambda * c) / 2.0, off],
        [off, (1.0 - lambda * c) / 2.0],
    ]
}

fn reverse_base3_digits(t: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; t.len()];
    for (idx, &v) in t.iter().enumerate() {
        let mut rest = idx;
        let mut rev = 0;
        for _ in 0..m {
            rev = rev * 3 + rest % 3;
            rest /= 3;
        }
        out[rev] = v;
    }
    out
}

type Factor = [f64; 3];

/// A field compiled to `L = Σ_α T_α Π_k v_k[α_k]` with
/// `v_k = (1, λ cos φ_k, λ sin φ_k)`; digit `k` of `α` (base 3, least
/// significant first) belongs to parameter `k`. Value costs `O(3^m)` and
/// value plus full gradient about three times that.
#[derive(Debug, Clone, PartialEq)]
pub struct WhrfLandscape {
    m: usize,
    tensor: Vec<f64>,
}

impl WhrfLandscape {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Per-parameter factors `(1, λ cos, λ sin)` and their derivatives.
    fn basis(&self, phi: &[f64], lambda: f64) -> Result<(Vec<Factor>, Vec<Factor>)> {
        if phi.len() != self.m {
            return Err(Error::ParamLength {
                expected: self.m,
                got: phi.len(),
            });
        }
        check_finite(phi, "whrf angle")?;
        check_lambda(lambda)?;
        Ok(phi
            .iter()
            .map(|p| {
                let (s, c) = p.sin_cos();
                (
                    [1.0, lambda * c, lambda * s],
                    [0.0, -lambda * s, lambda * c],
                )
            })
            .unzip())
    }

    pub fn value(&self, phi: &[f64], lambda: f64) -> Result<f64> {
        let (v, _) = self.basis(phi, lambda)?;
        Ok(dot(&self.tensor, &kron(&v)))
    }

    pub fn value_and_grad(&self, phi: &[f64], lambda: f64) -> Result<(f64, Vec<f64>)> {
        let (v, dv) = self.basis(phi, lambda)?;
        let mut grad = vec![0.0; self.m];
        let value = contract_with_grad(&self.tensor, &v, &dv, &mut grad);
        Ok((value, grad))
    }
}

/// Tensor product of the per-parameter vectors, first vector least significant.
fn kron(vs: &[[f64; 3]]) -> Vec<f64> {
    let mut out = vec![1.0];
    for v in vs {
        let mut next = Vec::with_capacity(out.len() * 3);
        for &vk in v {
            next.extend(out.iter().map(|o| o * vk));
        }
        out = next;
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn contract_with_grad(t: &[f64], vs: &[[f64; 3]], dvs: &[[f64; 3]], grad: &mut [f64]) -> f64 {
    match vs.len() {
        0 => t[0],
        1 => {
            grad[0] = dot(t, &dvs[0]);
            dot(t, &vs[0])
        }
        len => {
            let s = len / 2;
            let low = 3usize.pow(s as u32);
            let high_w = kron(&vs[s..]);
            let mut t_low = vec![0.0; low];
            for (chunk, &w) in t.chunks_exact(low).zip(&high_w) {
                for (acc, x) in t_low.iter_mut().zip(chunk) {
                    *acc += w * x;
                }
            }
            let low_w = kron(&vs[..s]);
            let t_high: Vec<f64> = t
                .chunks_exact(low)
                .map(|chunk| dot(chunk, &low_w))
                .collect();
            let (g_low, g_high) = grad.split_at_mut(s);
            let value = contract_with_grad(&t_low, &vs[..s], &dvs[..s], g_low);
            contract_with_grad(&t_high, &vs[s..], &dvs[s..], g_high);
            value
        }
    }
}

/// Optimizer view of a field: `L(φ, μ)` is the regularized loss at `λ = 1 − μ`.
#[derive(Debug, Clone)]
pub struct WhrfLoss {
    landscape: WhrfLandscape,
}

impl WhrfLoss {
    pub fn new(field: &WishartField) -> Self {
        Self {
            landscape: field.compile(),
        }
    }

    pub fn landscape(&self) -> &WhrfLandscape {
        &self.landscape
    }
}

impl ParametricLoss for WhrfLoss {
    fn num_params(&self) -> usize {
        self.landscape.m
    }

    fn value(&self, phi: &[f64], mu: f64) -> Result<f64> {
        crate::error::check_mu(mu)?;
        self.landscape.value(phi, 1.0 - mu)
    }

    fn value_and_gradient(&self, phi: &[f64], mu: f64) -> Result<(f64, Vec<f64>)> {
        crate::error::check_mu(mu)?;
        self.landscape.value_and_grad(phi, 1.0 - mu)
    }
}

/// Largest deviation between `loss_reg(φ, λ)` and the Fourier table of the
/// plain loss with order-`k` modes scaled by `λ^k`, over 20 random φ.
pub fn mode_damping_check(field: &WishartField, lambda: f64, seed: u64) -> Result<f64> {
    check_lambda(lambda)?;
    let table = FourierTable::from_grid(field.m, MODE_CHECK_MAX_M, |phi| field.loss(phi))?
        .scale_orders(lambda);
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let phi = uniform_angles(&mut rng, field.m);
        worst = worst.max((table.eval(&phi)? - field.loss_reg(&phi, lambda)?).abs());
    }
    Ok(worst)
}

/// Degrees of freedom for a target ratio: `d = round(m / 2γ)`.
pub fn degrees_for_gamma(m: usize, gamma: f64) -> Result<usize> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gamma must be > 0, got {gamma}"
        )));
    }
    let d = (m as f64 / (2.0 * gamma)).round();
    if d < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "gamma {gamma} gives d = {d} < 1 at m = {m}"
        )));
    }
    Ok(d as usize)
}

/// Counts of `values` in `bins` equal bins over `[lo, lo + width]`.
pub fn histogram(values: &[f64], lo: f64, width: f64, bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    for &v in values {
        let pos = if width > 0.0 {
            (v - lo) / width * bins as f64
        } else {
            0.0
        };
        counts[(pos.max(0.0) as usize).min(bins - 1)] += 1;
    }
    counts
}

/// Binning of final losses used for the local-minimum diagnostic: 100 bins
/// from the best loss found, spanning the observed spread but at least
/// `floor` (so runs that all reach one minimum share the lowest bin instead
/// of resolving convergence jitter).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossHistogram {
    pub lo: f64,
    pub width: f64,
    pub counts: Vec<usize>,
}

impl LossHistogram {
    pub fn new(values: &[f64], floor: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("histogram input"));
        }
        check_finite(values, "histogram input")?;
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let width = (hi - lo).max(floor);
        Ok(Self {
            lo,
            width,
            counts: histogram(values, lo, width, HISTOGRAM_BINS),
        })
    }

    /// Fraction of samples in the lowest 5 of the 100 bins.
    pub fn low_bin_fraction(&self) -> f64 {
        let total: usize = self.counts.iter().sum();
        self.counts[..LOW_BINS].iter().sum::<usize>() as f64 / total as f64
    }
}

pub fn low_bin_fraction(values: &[f64], floor: f64) -> Result<f64> {
    Ok(LossHistogram::new(values, floor)?.low_bin_fraction())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSweepConfig {
    pub m: usize,
    pub gammas: Vec<f64>,
    pub instances: usize,
    pub n_starts: usize,
    pub schedule: Schedule,
    #[serde(default)]
    pub adam: AdamConfig,
    pub master_seed: u64,
    /// Minimum histogram span relative to the landscape mean `Tr(W)/2^m`.
    #[serde(default = "default_bin_floor")]
    pub bin_floor: f64,
}

pub fn default_bin_floor() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRun {
    pub gamma: f64,
    pub instance_seed: u64,
    pub run_seed: u64,
    pub final_loss: f64,
    pub regularized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepInstance {
    pub gamma: f64,
    pub d: usize,
    pub instance_seed: u64,
    pub histogram: LossHistogram,
    pub low_bin_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSweep {
    pub runs: Vec<SweepRun>,
    pub instances: Vec<SweepInstance>,
}

impl GammaSweep {
    /// Mean low-bin fraction per γ, in sweep order.
    pub fn mean_fractions(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64, usize)> = Vec::new();
        for inst in &self.instances {
            match out.iter_mut().find(|(g, _, _)| *g == inst.gamma) {
                Some(e) => {
                    e.1 += inst.low_bin_fraction;
                    e.2 += 1;
                }
                None => out.push((inst.gamma, inst.low_bin_fraction, 1)),
            }
        }
        out.into_iter().map(|(g, s, n)| (g, s / n as f64)).collect()
    }

    /// Columns `gamma,instance_seed,run_seed,final_loss,regularized_flag`.
    pub fn write_runs_csv<W: Write>(&self, out: W) -> Result<()> {
        write_sweep_runs(&self.runs, out)
    }

    /// One row per instance with its low-bin fraction and 100 bin counts.
    pub fn write_histograms_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        let mut header = vec![
            "gamma".to_string(),
            "d".into(),
            "instance_seed".into(),
            "bin_lo".into(),
            "bin_width".into(),
            "low_bin_fraction".into(),
        ];
        header.extend((0..HISTOGRAM_BINS).map(|b| format!("bin{b}")));
        wtr.write_record(&header)?;
        for inst in &self.instances {
            let mut row = vec![
                inst.gamma.to_string(),
                inst.d.to_string(),
                inst.instance_seed.to_string(),
                inst.histogram.lo.to_string(),
                inst.histogram.width.to_string(),
                inst.low_bin_fraction.to_string(),
            ];
            row.extend(inst.histogram.counts.iter().map(|c| c.to_string()));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub fn write_sweep_runs<W: Write>(runs: &[SweepRun], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record([
        "gamma",
        "instance_seed",
        "run_seed",
        "final_loss",
        "regularized_flag",
    ])?;
    for r in runs {
        wtr.write_record([
            r.gamma.to_string(),
            r.instance_seed.to_string(),
            r.run_seed.to_string(),
            r.final_loss.to_string(),
            u8::from(r.regularized).to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Seed of instance `i` at sweep position `g` under `master`.
pub fn instance_seed(master: u64, g: usize, i: usize) -> u64 {
    derive_seed(derive_seed(master, "gamma", g as u64), "instance", i as u64)
}

/// For each γ: sample instances, run multistart with the given schedule and
/// histogram the final unregularized losses.
pub fn gamma_sweep(cfg: &GammaSweepConfig) -> Result<GammaSweep> {
    if cfg.instances == 0 || cfg.gammas.is_empty() {
        return Err(Error::InvalidArgument(
            "gamma sweep needs gammas and instances".into(),
        ));
    }
    let ds = cfg
        .gammas
        .iter()
        .map(|&g| degrees_for_gamma(cfg.m, g))
        .collect::<Result<Vec<_>>>()?;
    let regularized = !cfg.schedule.is_baseline();
    let mut runs = Vec::new();
    let mut instances = Vec::new();
    for (g, (&gamma, &d)) in cfg.gammas.iter().zip(&ds).enumerate() {
        for i in 0..cfg.instances {
            let seed = instance_seed(cfg.master_seed, g, i);
            let field = WishartField::sample(cfg.m, d, seed)?;
            let loss = WhrfLoss::new(&field);
            let records = multistart(
                &loss,
                cfg.n_starts,
                &cfg.schedule,
                &cfg.adam,
                derive_seed(seed, "restarts", 0),
                RunOptions::default(),
            )?;
            let finals: Vec<f64> = records.iter().map(|r| r.final_loss_mu0).collect();
            let histogram = LossHistogram::new(&finals, cfg.bin_floor * field.mean_loss())?;
            runs.extend(records.iter().map(|r| SweepRun {
                gamma,
                instance_seed: seed,
                run_seed: r.seed,
                final_loss: r.final_loss_mu0,
                regularized,
            }));
            instances.push(SweepInstance {
                gamma,
                d,
                instance_seed: seed,
                low_bin_fraction: histogram.low_bin_fraction(),
                histogram,
            });
        }
    }
    Ok(GammaSweep { runs, instances })
}

/// Writes `W` as CSV (one matrix row per line) plus a JSON sidecar next to
/// it with the same stem.
pub fn save_instance(field: &WishartField, csv_path: &Path) -> Result<PathBuf> {
    let mut wtr = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(csv_path)?;
    for row in field.w.chunks(field.dim()) {
        wtr.write_record(row.iter().map(|v| v.to_string()))?;
    }
    wtr.flush()?;
    let sidecar = csv_path.with_extension("json");
    std::fs::write(&sidecar, serde_json::to_string_pretty(&field.meta())?)?;
    Ok(sidecar)
}

pub fn load_instance(csv_path: &Path) -> Result<WishartField> {
    let meta: InstanceMeta =
        serde_json::from_str(&std::fs::read_to_string(csv_path.with_extension("json"))?)?;
    if meta.real_or_complex != "real" {
        return Err(Error::InvalidArgument(format!(
            "unsupported wishart kind {:?}",
            meta.real_or_complex
        )));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(csv_path)?;
    let mut w = Vec::new();
    for rec in rdr.records() {
        for field in rec?.iter() {
            w.push(
                field.trim().parse::<f64>().map_err(|e| {
                    Error::InvalidArgument(format!("bad matrix entry {field:?}: {e}"))
                })?,
            );
        }
    }
    let mut field = WishartField::from_matrix(meta.m, w)?;
    field.d = meta.d;
    field.seed = meta.seed;
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{fd_grad, param_shift_grad};
    use std::f64::consts::PI;

    fn projector() -> WishartField {
        WishartField::from_matrix(1, vec![1.0, 0.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn one_parameter_projector() {
        let f = projector();
        for &phi in &[0.0, 0.7, 2.0, -1.1] {
            let expected = (1.0 + f64::cos(phi)) / 2.0;
            assert!((f.loss(&[phi]).unwrap() - expected).abs() < 1e-15);
            assert!((f.loss_reg(&[phi], 1.0).unwrap() - expected).abs() < 1e-15);
            let damped = (1.0 + 0.3 * f64::cos(phi)) / 2.0;
            assert!((f.loss_reg(&[phi], 0.3).unwrap() - damped).abs() < 1e-15);
        }
        let g = f.grad(&[PI / 2.0], 1.0).unwrap();
        assert!((g[0] + 0.5).abs() < 1e-15);
        assert!(mode_damping_check(&f, 0.4, 1).unwrap() < 1e-14);
    }

    #[test]
    fn identity_is_flat() {
        let dim = 8;
        let mut w = vec![0.0; dim * dim];
        for i in 0..dim {
            w[i * dim + i] = 1.0;
        }
        let f = WishartField::from_matrix(3, w).unwrap();
        assert!((f.loss(&[0.3, 1.2, 2.9]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn regularized_limits() {
        let f = WishartField::sample(4, 7, 41).unwrap();
        let mut rng = rng_from_seed(42);
        let flat = f.mean_loss();
        for _ in 0..10 {
            let phi = uniform_angles(&mut rng, 4);
            let plain = f.loss(&phi).unwrap();
            assert!(plain >= 0.0);
            assert!((f.loss_reg(&phi, 1.0).unwrap() - plain).abs() < 1e-12);
            assert!((f.loss_reg(&phi, 0.0).unwrap() - flat).abs() < 1e-12);
            assert!(f.grad(&phi, 0.0).unwrap().iter().all(|g| g.abs() < 1e-12));
        }
    }

    #[test]
    fn flat_limit_is_monte_carlo_average() {
        let f = WishartField::sample(3, 4, 43).unwrap();
        let mut rng = rng_from_seed(44);
        let n = 100_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let v = f.loss(&uniform_angles(&mut rng, 3)).unwrap();
            s += v;
            s2 += v * v;
        }
        let mean = s / n as f64;
        let sem = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        let flat = f.loss_reg(&[0.0; 3], 0.0).unwrap();
        assert!((mean - flat).abs() < 5.0 * sem);
    }

    #[test]
    fn compiled_landscape_matches_contraction() {
        let mut rng = rng_from_seed(45);
        for m in [1, 2, 3, 5] {
            let f = WishartField::sample(m, 3, 46 + m as u64).unwrap();
            let land = f.compile();
            for &lambda in &[1.0, 0.6, 0.0] {
                let phi = uniform_angles(&mut rng, m);
                let direct = f.loss_reg(&phi, lambda).unwrap();
                let (v, g) = land.value_and_grad(&phi, lambda).unwrap();
                assert!((land.value(&phi, lambda).unwrap() - direct).abs() < 1e-12);
                assert!((v - direct).abs() < 1e-12);
                let gs = f.grad(&phi, lambda).unwrap();
                for k in 0..m {
                    assert!((g[k] - gs[k]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let f = WishartField::sample(5, 4, 47).unwrap();
        let loss = WhrfLoss::new(&f);
        let mut rng = rng_from_seed(48);
        for _ in 0..10 {
            let phi = uniform_angles(&mut rng, 5);
            let (_, g) = loss.value_and_gradient(&phi, 0.3).unwrap();
            let fd = fd_grad(&loss, &phi, 0.3, 1e-5).unwrap();
            let ps = param_shift_grad(&loss, &phi, 0.3).unwrap();
            for k in 0..5 {
                assert!((g[k] - fd[k]).abs() < 1e-6);
                assert!((g[k] - ps[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mode_damping_holds() {
        let f = WishartField::sample(4, 5, 49).unwrap();
        for &lambda in &[0.25, 0.5, 0.75, 1.0] {
            assert!(mode_damping_check(&f, lambda, 50).unwrap() < 1e-9);
        }
        let big = WishartField::sample(7, 5, 49).unwrap();
        assert!(matches!(
            mode_damping_check(&big, 0.5, 1),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn sampling_properties() {
        let a = WishartField::sample(3, 5, 51).unwrap();
        assert_eq!(a, WishartField::sample(3, 5, 51).unwrap());
        assert_ne!(a, WishartField::sample(3, 5, 52).unwrap());
        let w = a.matrix();
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(a.min_eigenvalue() >= -1e-9 * norm);
        assert!((a.gamma().unwrap() - 0.3).abs() < 1e-15);
        assert!(WishartField::sample(13, 5, 1).is_err());
        assert!(WishartField::sample(3, 0, 1).is_err());

        // E[W_ii] = 1: mean diagonal over many seeds
        let n = 400;
        let diag: Vec<f64> = (0..n)
            .map(|s| WishartField::sample(2, 3, 1000 + s).unwrap().matrix()[5])
            .collect();
        let mean = diag.iter().sum::<f64>() / n as f64;
        let var = diag.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 1.0).abs() < 3.0 * (var / n as f64).sqrt());

        // large d concentrates W near the identity
        let big = WishartField::sample(2, 20_000, 53).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((big.matrix()[i * 4 + j] - target).abs() < 0.05);
            }
        }
    }

    #[test]
    fn scale_covariance() {
        let f = WishartField::sample(3, 2, 54).unwrap();
        let g = f.scaled(2.5);
        let phi = [0.4, 1.9, 3.3];
        let a = f.loss_reg(&phi, 0.7).unwrap() * 2.5;
        assert!((g.loss_reg(&phi, 0.7).unwrap() - a).abs() < 1e-12);
    }

    #[test]
    fn gamma_arithmetic() {
        assert_eq!(degrees_for_gamma(6, 0.03).unwrap(), 100);
        assert_eq!(degrees_for_gamma(8, 0.03).unwrap(), 133);
        assert_eq!(degrees_for_gamma(8, 2.0).unwrap(), 2);
        assert!(degrees_for_gamma(2, 5.0).is_err());
        assert!(degrees_for_gamma(2, 0.0).is_err());
    }

    #[test]
    fn histogram_fraction() {
        let values: Vec<f64> = (0..100).map(f64::from).collect();
        let h = LossHistogram::new(&values, 0.0).unwrap();
        assert_eq!(h.counts.iter().sum::<usize>(), 100);
        assert_eq!(h.low_bin_fraction(), 0.05);
        // all within the floor: everything in the lowest bin
        let tight = [1.0, 1.0 + 1e-9, 1.0 + 2e-9];
        assert_eq!(low_bin_fraction(&tight, 0.1).unwrap(), 1.0);
    }

    #[test]
    fn small_sweep_is_reproducible() {
        let cfg = GammaSweepConfig {
            m: 3,
            gammas: vec![0.5, 1.5],
            instances: 2,
            n_starts: 4,
            schedule: Schedule::baseline(50),
            adam: AdamConfig::default(),
            master_seed: 5,
            bin_floor: default_bin_floor(),
        };
        let a = gamma_sweep(&cfg).unwrap();
        let b = gamma_sweep(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.runs.len(), 16);
        assert_eq!(a.mean_fractions().len(), 2);
        let mut buf = Vec::new();
        a.write_runs_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 17);
    }

    #[test]
    fn instance_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = WishartField::sample(3, 4, 55).unwrap();
        let path = dir.path().join("w.csv");
        save_instance(&f, &path).unwrap();
        assert_eq!(load_instance(&path).unwrap(), f);
    }
}
