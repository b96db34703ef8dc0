//! Descriptive statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation (n denominator).
pub fn population_std(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Empirical quantile with linear interpolation between order statistics
/// (Hyndman–Fan type 7). `sorted` must be ascending and nonempty.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean, sample std and an empirical central interval at `ci_level`.
pub fn summary_stats(samples: &[f64], ci_level: f64) -> Result<SummaryStats> {
    if samples.len() < 2 {
        return Err(Error::invalid(format!(
            "summary_stats needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if !(ci_level > 0.0 && ci_level < 1.0) {
        return Err(Error::invalid(format!("ci_level {ci_level} outside (0, 1)")));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("summary_stats on non-finite samples"));
    }
    let n = samples.len() as f64;
    let m = mean(samples);
    let var = samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let tail = (1.0 - ci_level) / 2.0;
    Ok(SummaryStats {
        mean: m,
        std: var.sqrt(),
        ci_low: quantile_sorted(&sorted, tail),
        ci_high: quantile_sorted(&sorted, 1.0 - tail),
    })
}

/// Normalized histogram (a density) with bins `[origin + i·width, origin + (i+1)·width)`.
/// Returns `(bin_center, density)` pairs covering the data range.
pub fn density_histogram(values: &[f64], width: f64) -> Vec<(f64, f64)> {
    if values.is_empty() || width <= 0.0 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let first = (lo / width).floor() as i64;
    let last = (hi / width).floor() as i64;
    let mut counts = vec![0usize; (last - first + 1) as usize];
    for v in values {
        let b = ((v / width).floor() as i64 - first) as usize;
        counts[b] += 1;
    }
    let norm = 1.0 / (values.len() as f64 * width);
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (((first + i as i64) as f64 + 0.5) * width, c as f64 * norm))
        .collect()
}
