//! Averaged power spectrum of a growth panel: on the Fourier grid, on
//! chopped prefixes, and as a continuous function of the period.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::growth::{to_growth, GrowthPanel};
use crate::numerics::{dft_forward, ComplexSeries};
use crate::panel::Panel;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSet {
    pub n_prime: usize,
    /// Per-series coefficients `w̃(ω_k)`.
    pub coefficients: Vec<ComplexSeries>,
    /// `p(ω_k) = (1/M) Σ |w̃(ω_k)|²` for `k = 0..N′−1`.
    pub power: Vec<f64>,
    /// Wavenumbers shown on period plots: `1..=N′/2`.
    pub half_range: Vec<usize>,
}

impl SpectrumSet {
    /// `T_k = N′/k` in months; infinite for `k = 0`.
    pub fn period(&self, k: usize) -> f64 {
        self.n_prime as f64 / k as f64
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }
}

pub fn averaged_power_spectrum(gp: &GrowthPanel) -> Result<SpectrumSet> {
    let coefficients = gp
        .rates_norm
        .iter()
        .map(|w| dft_forward(w))
        .collect::<Result<Vec<_>>>()?;
    let n_prime = gp.n_prime();
    let m = coefficients.len() as f64;
    let power = (0..n_prime)
        .map(|k| coefficients.iter().map(|c| c.get(k).norm_sqr()).sum::<f64>() / m)
        .collect();
    Ok(SpectrumSet {
        n_prime,
        coefficients,
        power,
        half_range: (1..=n_prime / 2).collect(),
    })
}

pub const MIN_CHOP_MONTHS: usize = 24;

/// Chop lengths 234, 229, …, 164.
pub fn default_chops() -> Vec<usize> {
    (0..15).map(|i| 234 - 5 * i).collect()
}

/// Spectrum of each prefix panel of `s` months, re-normalized per prefix.
pub fn chopped_spectra(panel: &Panel, chops: &[usize]) -> Result<Vec<(usize, SpectrumSet)>> {
    chops
        .iter()
        .map(|&s| {
            if s < MIN_CHOP_MONTHS {
                return Err(Error::invalid(format!(
                    "chop length {s} below the {MIN_CHOP_MONTHS}-month floor"
                )));
            }
            let gp = to_growth(&panel.chop(s)?)?;
            Ok((s, averaged_power_spectrum(&gp)?))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuousSpectrum {
    pub periods: Vec<f64>,
    pub values: Vec<f64>,
}

pub const DEFAULT_CONTINUOUS_STEP: f64 = 0.01;

/// `p(2π/T)` on an explicit list of periods.
pub fn continuous_spectrum_at(gp: &GrowthPanel, periods: &[f64]) -> Result<ContinuousSpectrum> {
    let n_prime = gp.n_prime();
    if let Some(&bad) = periods.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(Error::invalid(format!("invalid period {bad}")));
    }
    let scale = 1.0 / (n_prime as f64).sqrt();
    let m = gp.n_series() as f64;
    let values = periods
        .iter()
        .map(|&t| {
            let omega = 2.0 * PI / t;
            let phasors: Vec<Complex64> = (1..=n_prime)
                .map(|j| Complex64::from_polar(scale, omega * j as f64))
                .collect();
            gp.rates_norm
                .iter()
                .map(|w| {
                    w.iter()
                        .zip(&phasors)
                        .fold(Complex64::new(0.0, 0.0), |acc, (x, e)| acc + e * x)
                        .norm_sqr()
                })
                .sum::<f64>()
                / m
        })
        .collect();
    Ok(ContinuousSpectrum {
        periods: periods.to_vec(),
        values,
    })
}

/// `p(2π/T)` on the grid `t_min, t_min + step, …, ≤ t_max`.
pub fn continuous_spectrum(
    gp: &GrowthPanel,
    t_min: f64,
    t_max: f64,
    step: f64,
) -> Result<ContinuousSpectrum> {
    let n_prime = gp.n_prime() as f64;
    if !(t_min >= 2.0 && t_min < t_max && t_max <= n_prime && step > 0.0) {
        return Err(Error::invalid(format!(
            "continuous grid needs 2 <= t_min < t_max <= N' ({n_prime}) and step > 0; got [{t_min}, {t_max}] step {step}"
        )));
    }
    let count = ((t_max - t_min) / step + 1e-9).floor() as usize + 1;
    let periods: Vec<f64> = (0..count).map(|i| t_min + i as f64 * step).collect();
    continuous_spectrum_at(gp, &periods)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralPeak {
    pub period: f64,
    pub power: f64,
    pub prominence: f64,
    /// Full cycles inside the sample, `N′/T`.
    pub cycles: f64,
    /// Fewer than the configured number of full cycles fit in the sample.
    pub one_time: bool,
}

pub const DEFAULT_MIN_CYCLES: f64 = 3.0;

/// Interior local maxima with topographic prominence of at least
/// `min_prominence`, ordered by period.
pub fn find_peaks(
    cs: &ContinuousSpectrum,
    n_prime: usize,
    min_prominence: f64,
    min_cycles: f64,
) -> Vec<SpectralPeak> {
    let v = &cs.values;
    let n = v.len();
    let mut peaks = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if !(v[i] > v[i - 1] && v[i] >= v[i + 1]) {
            continue;
        }
        let mut left_min = v[i];
        let mut j = i;
        while j > 0 {
            j -= 1;
            if v[j] > v[i] {
                break;
            }
            left_min = left_min.min(v[j]);
        }
        let mut right_min = v[i];
        for &x in &v[i + 1..] {
            if x > v[i] {
                break;
            }
            right_min = right_min.min(x);
        }
        let prominence = v[i] - left_min.max(right_min);
        if prominence >= min_prominence {
            let cycles = n_prime as f64 / cs.periods[i];
            peaks.push(SpectralPeak {
                period: cs.periods[i],
                power: v[i],
                prominence,
                cycles,
                one_time: cycles < min_cycles,
            });
        }
    }
    peaks
}
