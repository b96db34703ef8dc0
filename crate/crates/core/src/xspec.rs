//! Smoothed cross-spectra of two series: squared coherency, phase, and
//! delays with confidence intervals.
//!
//! With `x̃, ỹ` from [`dft_forward`], the cross-periodogram is
//! `I_xy(ω_k) = x̃(ω_k)* ỹ(ω_k)`, so a positive phase means `y` lags `x`.
//! Smoothed ordinates `ŝ = Σ_ℓ γ_ℓ I(ω_{k−ℓ})` use a modified Daniell kernel.
//! Null coherency levels and phase intervals follow the large-sample forms
//!
//! ```text
//! c_α   = 1 − (1 − α)^{1/(m−1)},          m = ν/2,  ν = 2 / Σ γ_ℓ²
//! Var φ = (1/ν)(1/κ̂² − 1)   [rad²]
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::dft_forward;

pub const MIN_XSPEC_LEN: usize = 8;
pub const DEFAULT_SPAN: usize = 11;
/// Two-sided 95% normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq)]
pub struct Periodograms {
    pub xx: Vec<f64>,
    pub yy: Vec<f64>,
    pub xy: Vec<Complex64>,
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "series lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < MIN_XSPEC_LEN {
        return Err(Error::invalid(format!(
            "cross-spectrum needs at least {MIN_XSPEC_LEN} points, got {}",
            x.len()
        )));
    }
    Ok(())
}

pub fn periodograms(x: &[f64], y: &[f64]) -> Result<Periodograms> {
    check_pair(x, y)?;
    let fx = dft_forward(x)?;
    let fy = dft_forward(y)?;
    Ok(Periodograms {
        xx: fx.power(),
        yy: fy.power(),
        xy: fx
            .values()
            .iter()
            .zip(fy.values())
            .map(|(a, b)| a.conj() * b)
            .collect(),
    })
}

/// Treatment of ordinates beyond either end of the frequency grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeMode {
    #[default]
    Circular,
    /// Drop out-of-range ordinates and renormalize the remaining weights.
    Truncate,
}

/// Weights `γ_ℓ`, `ℓ = −h..=h`, for an odd total span `2h + 1`:
/// `1/(2h)` inside, `1/(4h)` at `ℓ = ±h`.
pub fn daniell_weights(span: usize) -> Result<Vec<f64>> {
    if span % 2 == 0 || span < 3 {
        return Err(Error::invalid(format!(
            "kernel span must be odd and at least 3, got {span}"
        )));
    }
    let h = (span - 1) / 2;
    let inner = 1.0 / (2 * h) as f64;
    Ok((0..span)
        .map(|i| if i == 0 || i == span - 1 { inner / 2.0 } else { inner })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Smoothed {
    pub values: Vec<Complex64>,
    pub weights: Vec<f64>,
    /// `√(1/12 + Σ ℓ² γ_ℓ) / L` in cycles per month.
    pub bandwidth: f64,
    /// `2 / Σ γ_ℓ²`.
    pub eq_dof: f64,
}

pub fn kernel_bandwidth(weights: &[f64], len: usize) -> f64 {
    let h = (weights.len() / 2) as f64;
    let second: f64 = weights
        .iter()
        .enumerate()
        .map(|(i, g)| (i as f64 - h).powi(2) * g)
        .sum();
    (1.0 / 12.0 + second).sqrt() / len as f64
}

pub fn equivalent_dof(weights: &[f64]) -> f64 {
    2.0 / weights.iter().map(|g| g * g).sum::<f64>()
}

pub fn smooth_daniell(values: &[Complex64], span: usize, edge: EdgeMode) -> Result<Smoothed> {
    let weights = daniell_weights(span)?;
    let len = values.len();
    if span > len / 2 {
        return Err(Error::invalid(format!(
            "kernel span {span} exceeds half the sequence length {len}"
        )));
    }
    let h = (span / 2) as isize;
    let n = len as isize;
    let out = (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut wsum = 0.0;
            for (i, g) in weights.iter().enumerate() {
                let j = k - (i as isize - h);
                let idx = match edge {
                    EdgeMode::Circular => j.rem_euclid(n),
                    EdgeMode::Truncate if (0..n).contains(&j) => j,
                    EdgeMode::Truncate => continue,
                };
                acc += values[idx as usize] * g;
                wsum += g;
            }
            acc / wsum
        })
        .collect();
    Ok(Smoothed {
        values: out,
        bandwidth: kernel_bandwidth(&weights, len),
        eq_dof: equivalent_dof(&weights),
        weights,
    })
}

/// `1 − (1 − level)^{1/(m−1)}` with `m = eq_dof / 2`.
pub fn coherency_level(eq_dof: f64, level: f64) -> f64 {
    let m = eq_dof / 2.0;
    1.0 - (1.0 - level).powf(1.0 / (m - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSpectrumEstimate {
    pub len: usize,
    pub span: usize,
    pub edge: EdgeMode,
    pub s_xx: Vec<f64>,
    pub s_yy: Vec<f64>,
    #[serde(skip)]
    pub s_xy: Vec<Complex64>,
    pub kappa2: Vec<f64>,
    /// `φ̂` in cycles, `ŝ_xy = |ŝ_xy| e^{2πiφ̂}`.
    pub phase: Vec<f64>,
    /// 95% interval for `φ̂` in cycles, only where `κ̂²` passes the 90% level.
    pub phase_ci: Vec<Option<(f64, f64)>>,
    pub kernel_weights: Vec<f64>,
    pub bandwidth: f64,
    pub eq_dof: f64,
    pub level_90: f64,
    pub level_99: f64,
    pub alignment_shift: i64,
}

impl CrossSpectrumEstimate {
    pub fn period(&self, k: usize) -> f64 {
        self.len as f64 / k as f64
    }

    pub fn significant_90(&self, k: usize) -> bool {
        self.kappa2[k] > self.level_90
    }

    pub fn significant_99(&self, k: usize) -> bool {
        self.kappa2[k] > self.level_99
    }
}

/// `y_aligned(t_j) = y(t_{j+s})`, circularly.
pub fn advance(y: &[f64], shift: i64) -> Vec<f64> {
    let n = y.len() as i64;
    (0..n).map(|j| y[(j + shift).rem_euclid(n) as usize]).collect()
}

fn demeaned(x: &[f64]) -> Vec<f64> {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - m).collect()
}

/// The zero-frequency ordinate of a demeaned series is identically zero;
/// it is replaced by the mean of its two neighbours before smoothing.
fn fill_zero_frequency<T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>>(
    v: &mut [T],
) {
    let n = v.len();
    v[0] = (v[1] + v[n - 1]) * 0.5;
}

pub fn coherency_phase(
    x: &[f64],
    y: &[f64],
    span: usize,
    alignment_shift: i64,
    edge: EdgeMode,
) -> Result<CrossSpectrumEstimate> {
    check_pair(x, y)?;
    let len = x.len();
    if alignment_shift.unsigned_abs() as usize * 4 >= len {
        return Err(Error::invalid(format!(
            "alignment shift {alignment_shift} must stay below a quarter of the length {len}"
        )));
    }
    let xd = demeaned(x);
    let yd = demeaned(&advance(y, alignment_shift));
    let mut p = periodograms(&xd, &yd)?;
    fill_zero_frequency(&mut p.xx);
    fill_zero_frequency(&mut p.yy);
    fill_zero_frequency(&mut p.xy);

    let to_c = |v: &[f64]| v.iter().map(|&r| Complex64::new(r, 0.0)).collect::<Vec<_>>();
    let sxx = smooth_daniell(&to_c(&p.xx), span, edge)?;
    let syy = smooth_daniell(&to_c(&p.yy), span, edge)?;
    let sxy = smooth_daniell(&p.xy, span, edge)?;

    let s_xx: Vec<f64> = sxx.values.iter().map(|c| c.re).collect();
    let s_yy: Vec<f64> = syy.values.iter().map(|c| c.re).collect();
    let eq_dof = sxy.eq_dof;
    let level_90 = coherency_level(eq_dof, 0.90);
    let level_99 = coherency_level(eq_dof, 0.99);

    let mut kappa2 = Vec::with_capacity(len);
    let mut phase = Vec::with_capacity(len);
    let mut phase_ci = Vec::with_capacity(len);
    for k in 0..len {
        let denom = s_xx[k] * s_yy[k];
        let k2 = if denom > 0.0 {
            (sxy.values[k].norm_sqr() / denom).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let ph = sxy.values[k].arg() / (2.0 * PI);
        let ci = (k2 > level_90).then(|| {
            let sd = ((1.0 / k2 - 1.0) / eq_dof).sqrt() / (2.0 * PI);
            (ph - Z_95 * sd, ph + Z_95 * sd)
        });
        kappa2.push(k2);
        phase.push(ph);
        phase_ci.push(ci);
    }

    Ok(CrossSpectrumEstimate {
        len,
        span,
        edge,
        s_xx,
        s_yy,
        s_xy: sxy.values,
        kappa2,
        phase,
        phase_ci,
        kernel_weights: sxy.weights,
        bandwidth: sxy.bandwidth,
        eq_dof,
        level_90,
        level_99,
        alignment_shift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DelayResult {
    Significant {
        delta: f64,
        ci_low: f64,
        ci_high: f64,
    },
    NotSignificant {
        kappa2: f64,
        level_90: f64,
    },
}

impl DelayResult {
    pub fn delta(&self) -> Option<f64> {
        match self {
            DelayResult::Significant { delta, .. } => Some(*delta),
            DelayResult::NotSignificant { .. } => None,
        }
    }
}

/// Delay of `y` behind `x` in months at wavenumber `k`: `φ̂ · T_k + shift`.
pub fn delay_in_months(est: &CrossSpectrumEstimate, k: usize) -> Result<DelayResult> {
    if k == 0 || k > est.len / 2 {
        return Err(Error::invalid(format!(
            "delay wavenumber {k} outside 1..={}",
            est.len / 2
        )));
    }
    let t = est.period(k);
    let shift = est.alignment_shift as f64;
    Ok(match est.phase_ci[k] {
        Some((lo, hi)) => DelayResult::Significant {
            delta: est.phase[k] * t + shift,
            ci_low: lo * t + shift,
            ci_high: hi * t + shift,
        },
        None => DelayResult::NotSignificant {
            kappa2: est.kappa2[k],
            level_90: est.level_90,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wave(len: usize, k: usize, shift: f64) -> Vec<f64> {
        (1..=len)
            .map(|t| (2.0 * PI * k as f64 * (t as f64 - shift) / len as f64).cos())
            .collect()
    }

    #[test]
    fn kernel_of_span_eleven() {
        let w = daniell_weights(11).unwrap();
        assert_eq!(w.len(), 11);
        assert!((w[0] - 0.05).abs() < 1e-15 && (w[5] - 0.1).abs() < 1e-15);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((kernel_bandwidth(&w, 239) - 0.01226).abs() < 5e-6);
        assert!((equivalent_dof(&w) - 2.0 / 0.095).abs() < 1e-12);
        assert!(daniell_weights(10).is_err());
        assert!(daniell_weights(1).is_err());
    }

    #[test]
    fn self_pair_and_sign_flip() {
        let x: Vec<f64> = (0..32).map(|j| ((j * 7) % 5) as f64 - 2.0).collect();
        let p = periodograms(&x, &x).unwrap();
        for (a, b) in p.xy.iter().zip(&p.xx) {
            assert!((a.re - b).abs() < 1e-12 && a.im.abs() < 1e-12);
        }
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let q = periodograms(&x, &neg).unwrap();
        for (a, b) in q.xy.iter().zip(&p.xx) {
            assert!((a.re + b).abs() < 1e-12);
        }
        assert!(periodograms(&x, &x[1..]).is_err());
    }

    #[test]
    fn shift_theorem_phase() {
        let len = 64;
        let x = wave(len, 5, 0.0);
        let y = advance(&x, -1);
        let p = periodograms(&x, &y).unwrap();
        let omega = 2.0 * PI * 5.0 / len as f64;
        assert!((p.xy[5].arg() - omega).abs() < 1e-10);
    }

    #[test]
    fn smoothing_constant_and_impulse() {
        let c = vec![Complex64::new(2.5, -1.0); 40];
        for edge in [EdgeMode::Circular, EdgeMode::Truncate] {
            let s = smooth_daniell(&c, 5, edge).unwrap();
            assert!(s.values.iter().all(|v| (v - c[0]).norm() < 1e-14));
        }
        let mut imp = vec![Complex64::new(0.0, 0.0); 40];
        imp[10] = Complex64::new(1.0, 0.0);
        let s = smooth_daniell(&imp, 5, EdgeMode::Circular).unwrap();
        let expect = [0.125, 0.25, 0.25, 0.25, 0.125];
        for (i, e) in expect.iter().enumerate() {
            assert!((s.values[8 + i].re - e).abs() < 1e-15);
        }
        assert!(s.values[7].norm() < 1e-15 && s.values[13].norm() < 1e-15);
        assert!(smooth_daniell(&imp, 21, EdgeMode::Circular).is_err());
    }

    #[test]
    fn identical_series_fully_coherent() {
        let x: Vec<f64> = (0..100).map(|j| ((j * j + 3 * j) % 13) as f64).collect();
        let est = coherency_phase(&x, &x, 11, 0, EdgeMode::Circular).unwrap();
        for k in 0..100 {
            assert!((est.kappa2[k] - 1.0).abs() < 1e-12);
            assert!(est.phase[k].abs() < 1e-12);
        }
    }

    #[test]
    fn null_levels_for_span_eleven() {
        let dof = equivalent_dof(&daniell_weights(11).unwrap());
        assert!((coherency_level(dof, 0.90) - 0.2147).abs() < 5e-4);
        assert!((coherency_level(dof, 0.99) - 0.3833).abs() < 5e-4);
    }

    #[test]
    fn one_month_lag_of_sinusoid() {
        let len = 120;
        let x: Vec<f64> = (1..=len)
            .map(|t| wave(len, 6, 0.0)[t - 1] + 0.3 * wave(len, 11, 0.0)[t - 1])
            .collect();
        let y = advance(&x, -1);
        let est = coherency_phase(&x, &y, 5, 0, EdgeMode::Circular).unwrap();
        let d = delay_in_months(&est, 6).unwrap();
        assert!((d.delta().unwrap() - 1.0).abs() < 1e-9);
        let aligned = coherency_phase(&x, &y, 5, -3, EdgeMode::Circular).unwrap();
        assert!((delay_in_months(&aligned, 6).unwrap().delta().unwrap() - 1.0).abs() < 1e-9);
        assert!(coherency_phase(&x, &y, 5, 30, EdgeMode::Circular).is_err());
        assert!(delay_in_months(&est, 0).is_err());
    }
}
