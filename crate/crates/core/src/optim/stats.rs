use crate::error::{check_finite, Error, Result};

/// `p`-th percentile with linear interpolation between order statistics.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("percentile input"));
    }
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "percentile {p} outside [0, 100]"
        )));
    }
    check_finite(values, "percentile input")?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * p / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Fraction of `regularized` at or below the `p`-th percentile of `baseline`.
pub fn percentile_improvement(baseline: &[f64], regularized: &[f64], p: f64) -> Result<f64> {
    if regularized.is_empty() {
        return Err(Error::Empty("regularized losses"));
    }
    check_finite(regularized, "regularized losses")?;
    let threshold = percentile(baseline, p)?;
    let hits = regularized.iter().filter(|&&x| x <= threshold).count();
    Ok(hits as f64 / regularized.len() as f64)
}

/// [`percentile_improvement`] divided by `p / 100`; 1 means no change.
pub fn improvement_ratio(baseline: &[f64], regularized: &[f64], p: f64) -> Result<f64> {
    if p <= 0.0 {
        return Err(Error::InvalidArgument(
            "improvement ratio needs p > 0".into(),
        ));
    }
    Ok(percentile_improvement(baseline, regularized, p)? / (p / 100.0))
}

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("mean input"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Sample standard deviation (n − 1 denominator); 0 for a single value.
pub fn std_dev(values: &[f64]) -> Result<f64> {
    let mu = mean(values)?;
    if values.len() < 2 {
        return Ok(0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mu).powi(2)).sum();
    Ok((ss / (values.len() - 1) as f64).sqrt())
}
