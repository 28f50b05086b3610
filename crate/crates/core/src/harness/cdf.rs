//! Empirical CDFs and order statistics of sum-SE samples.

use crate::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfPoint {
    pub value: f64,
    /// Fraction of samples `<= value`.
    pub cdf: f64,
}

fn sorted(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(SimError::Domain("no samples".into()));
    }
    if let Some(v) = samples.iter().find(|v| !v.is_finite()) {
        return Err(SimError::Numerical(format!("non-finite sample {v}")));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Fraction of `sorted` that is `<= x`.
fn fraction_at(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

/// Empirical CDF evaluated on `grid_size` evenly spaced values from the
/// smallest to the largest sample.
pub fn compute_cdf(samples: &[f64], grid_size: usize) -> Result<Vec<CdfPoint>> {
    let s = sorted(samples)?;
    if grid_size < 2 {
        return Err(SimError::config(format!("CDF grid needs at least 2 points, got {grid_size}")));
    }
    let (lo, hi) = (s[0], s[s.len() - 1]);
    if lo == hi {
        return Ok(vec![CdfPoint { value: lo, cdf: 1.0 }]);
    }
    let step = (hi - lo) / (grid_size - 1) as f64;
    Ok((0..grid_size)
        .map(|i| {
            let value = if i + 1 == grid_size { hi } else { lo + step * i as f64 };
            CdfPoint { value, cdf: fraction_at(&s, value) }
        })
        .collect())
}

/// Empirical CDF at a single value.
pub fn cdf_at(samples: &[f64], x: f64) -> Result<f64> {
    Ok(fraction_at(&sorted(samples)?, x))
}

pub fn median(samples: &[f64]) -> Result<f64> {
    let s = sorted(samples)?;
    let n = s.len();
    Ok(if n % 2 == 1 { s[n / 2] } else { 0.5 * (s[n / 2 - 1] + s[n / 2]) })
}

pub fn mean(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(SimError::Domain("no samples".into()));
    }
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}
