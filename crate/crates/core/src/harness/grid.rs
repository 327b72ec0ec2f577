use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::ParametricLoss;

/// One scanned parameter: `points` evenly spaced values from `lo` to `hi`
/// inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub param: usize,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridAxis {
    pub fn full_period(param: usize, points: usize) -> Self {
        Self {
            param,
            lo: 0.0,
            hi: std::f64::consts::TAU,
            points,
        }
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.points < 2 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * i as f64 / (self.points - 1) as f64
        }
    }
}

/// Loss values on a 2D slice; row-major with the first axis outer.
#[derive(Debug, Clone, PartialEq)]
pub struct LandscapeGrid {
    pub axes: [GridAxis; 2],
    pub mu: f64,
    pub values: Vec<f64>,
}

impl LandscapeGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axes[1].points + j]
    }

    /// Columns `phi_a,phi_b,loss`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["phi_a", "phi_b", "loss"])?;
        let [a, b] = self.axes;
        for i in 0..a.points {
            for j in 0..b.points {
                wtr.write_record([
                    a.value(i).to_string(),
                    b.value(j).to_string(),
                    self.at(i, j).to_string(),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Scans `loss(·, μ)` over two axes; all other parameters stay at `base`.
pub fn landscape_grid<F: ParametricLoss + ?Sized>(
    loss: &F,
    base: &[f64],
    axes: &[GridAxis],
    mu: f64,
) -> Result<LandscapeGrid> {
    let [a, b]: [GridAxis; 2] = axes.try_into().map_err(|_| {
        Error::InvalidArgument(format!(
            "landscape grid needs exactly 2 axes, got {}",
            axes.len()
        ))
    })?;
    if base.len() != loss.num_params() {
        return Err(Error::ParamLength {
            expected: loss.num_params(),
            got: base.len(),
        });
    }
    for ax in [a, b] {
        if ax.param >= base.len() || ax.points == 0 {
            return Err(Error::InvalidArgument(format!("bad grid axis {ax:?}")));
        }
    }
    if a.param == b.param {
        return Err(Error::InvalidArgument(
            "grid axes must scan different parameters".into(),
        ));
    }
    let values = (0..a.points * b.points)
        .into_par_iter()
        .map(|idx| {
            let mut phi = base.to_vec();
            phi[a.param] = a.value(idx / b.points);
            phi[b.param] = b.value(idx % b.points);
            loss.value(&phi, mu)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(LandscapeGrid {
        axes: [a, b],
        mu,
        values,
    })
}
