//! Correlation matrix of the normalized panel, its eigenmodes, and
//! significance against random-matrix bounds.
//!
//! For `M` uncorrelated series of length `N′` with variance `σ²` the sample
//! correlation eigenvalues follow, as `M, N′ → ∞` with `Q = N′/M` fixed,
//!
//! ```text
//! ρ(λ) = (Q / 2πσ²) · √((λ₊ − λ)(λ − λ₋)) / λ,     λ₋ < λ < λ₊
//! λ± = σ² (1 ± √Q)² / Q
//! ```
//!
//! Modes above `λ₊` are reported as significant. A finite-sample null that
//! keeps each series' autocorrelation is available through [`rotation_null`].

use serde::Serialize;
use std::f64::consts::PI;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::growth::GrowthPanel;
use crate::numerics::stats::{density_histogram, quantile_sorted};
use crate::numerics::{
    eig_symmetric, eigenvalues_symmetric, summary_stats, Matrix, RngStream, SignConvention,
    SummaryStats, SymmetricEigenResult,
};
use crate::panel::{SeriesLabel, Variable};

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationModel {
    pub labels: Vec<SeriesLabel>,
    pub n_goods: usize,
    pub n_prime: usize,
    pub c: Matrix,
    pub eig: SymmetricEigenResult,
}

impl CorrelationModel {
    pub fn m(&self) -> usize {
        self.labels.len()
    }

    /// Mean of mode `n`'s components over one variable's goods (`V̄_α^(n)`, 0-based `n`).
    pub fn block_mean(&self, n: usize, variable: Variable) -> f64 {
        let g = self.n_goods;
        let start = variable.index() * g;
        self.eig.vector(n)[start..start + g].iter().sum::<f64>() / g as f64
    }

    pub fn rmt_params(&self) -> RmtParams {
        RmtParams::new(self.n_prime, self.m(), 1.0)
    }
}

/// `C_ab = (1/L) Σ_t w_a(t) w_b(t)` with the diagonal pinned to 1.
/// Inputs are expected to be standardized.
pub fn correlation_of(series: &[Vec<f64>]) -> Matrix {
    let m = series.len();
    let len = series[0].len() as f64;
    let mut c = Matrix::identity(m);
    for a in 0..m {
        for b in (a + 1)..m {
            let v: f64 = series[a].iter().zip(&series[b]).map(|(x, y)| x * y).sum::<f64>() / len;
            let v = v.clamp(-1.0, 1.0);
            c.set(a, b, v);
            c.set(b, a, v);
        }
    }
    c
}

/// Eigenvectors are signed so that their production-block mean is positive.
pub fn sign_convention(n_goods: usize) -> SignConvention {
    SignConvention::BlockMean(0..n_goods)
}

pub fn correlation_matrix(gp: &GrowthPanel) -> Result<CorrelationModel> {
    let c = correlation_of(&gp.rates_norm);
    let eig = eig_symmetric(&c, &sign_convention(gp.n_goods()))?;
    Ok(CorrelationModel {
        labels: gp.labels().to_vec(),
        n_goods: gp.n_goods(),
        n_prime: gp.n_prime(),
        c,
        eig,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RmtParams {
    pub sigma: f64,
    pub q: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl RmtParams {
    pub fn new(n_prime: usize, m: usize, sigma: f64) -> Self {
        Self::from_q(n_prime as f64 / m as f64, sigma)
    }

    pub fn from_q(q: f64, sigma: f64) -> Self {
        let s2 = sigma * sigma;
        let r = q.sqrt();
        Self {
            sigma,
            q,
            lambda_plus: s2 * (1.0 + r) * (1.0 + r) / q,
            lambda_minus: s2 * (1.0 - r) * (1.0 - r) / q,
        }
    }
}

/// Marchenko–Pastur eigenvalue density.
pub fn mp_density(lambda: f64, p: &RmtParams) -> f64 {
    if lambda <= p.lambda_minus || lambda >= p.lambda_plus || lambda <= 0.0 {
        return 0.0;
    }
    let s2 = p.sigma * p.sigma;
    p.q / (2.0 * PI * s2) * ((p.lambda_plus - lambda) * (lambda - p.lambda_minus)).sqrt() / lambda
}

/// Wigner semicircle density of a symmetric iid matrix's eigenvalues.
pub fn semicircle_density(lambda_a: f64, sigma: f64) -> f64 {
    let r2 = 4.0 * sigma * sigma - lambda_a * lambda_a;
    if r2 <= 0.0 {
        return 0.0;
    }
    r2.sqrt() / (2.0 * PI * sigma * sigma)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSignificance {
    /// 1-based mode index.
    pub mode: usize,
    pub eigenvalue: f64,
    pub significant: bool,
    /// `λ − λ₊`.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationNull {
    pub trials: usize,
    pub bin_width: f64,
    /// `(bin_center, density)` of all pooled null eigenvalues.
    pub eigenvalue_pdf: Vec<(f64, f64)>,
    pub largest: SummaryStats,
    pub second: SummaryStats,
    /// Empirical 99.9th percentile of the largest null eigenvalue.
    pub largest_p999: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignificanceReport {
    pub params: RmtParams,
    pub modes: Vec<ModeSignificance>,
    /// 1-based indices of modes above `λ₊`, largest eigenvalue first.
    pub significant_modes: Vec<usize>,
    pub density_curve: Vec<(f64, f64)>,
    pub null_distribution: Option<RotationNull>,
}

const DENSITY_POINTS: usize = 200;

pub fn classify_significance(model: &CorrelationModel, params: &RmtParams) -> SignificanceReport {
    let modes: Vec<ModeSignificance> = model
        .eig
        .values
        .iter()
        .enumerate()
        .map(|(i, &lam)| ModeSignificance {
            mode: i + 1,
            eigenvalue: lam,
            significant: lam > params.lambda_plus,
            margin: lam - params.lambda_plus,
        })
        .collect();
    let significant_modes = modes.iter().filter(|m| m.significant).map(|m| m.mode).collect();
    let (lo, hi) = (params.lambda_minus, params.lambda_plus);
    let density_curve = (0..=DENSITY_POINTS)
        .map(|i| {
            let lam = lo + (hi - lo) * i as f64 / DENSITY_POINTS as f64;
            (lam, mp_density(lam, params))
        })
        .collect();
    SignificanceReport {
        params: *params,
        modes,
        significant_modes,
        density_curve,
        null_distribution: None,
    }
}

/// How rotation offsets are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShiftPolicy {
    #[default]
    Uniform,
    /// Every offset is zero; reproduces the input panel.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationNullOptions {
    pub trials: usize,
    pub bin_width: f64,
    pub shift: ShiftPolicy,
}

pub const DEFAULT_NULL_BIN_WIDTH: f64 = 0.02;

impl Default for RotationNullOptions {
    fn default() -> Self {
        Self {
            trials: 1000,
            bin_width: DEFAULT_NULL_BIN_WIDTH,
            shift: ShiftPolicy::Uniform,
        }
    }
}

/// Circular cross-correlations `R_ab(d) = (1/L) Σ_i w_a(i) w_b((i + d) mod L)`
/// for `a < b`, packed by pair.
struct LaggedCorrelations {
    m: usize,
    len: usize,
    table: Vec<f64>,
}

impl LaggedCorrelations {
    fn new(series: &[Vec<f64>]) -> Self {
        let m = series.len();
        let len = series[0].len();
        let pairs = m * (m - 1) / 2;
        let mut table = vec![0.0; pairs * len];
        let mut idx = 0;
        for a in 0..m {
            for b in (a + 1)..m {
                let (wa, wb) = (&series[a], &series[b]);
                for d in 0..len {
                    let mut s = 0.0;
                    for i in 0..len {
                        let k = if i + d >= len { i + d - len } else { i + d };
                        s += wa[i] * wb[k];
                    }
                    table[idx * len + d] = s / len as f64;
                }
                idx += 1;
            }
        }
        Self { m, len, table }
    }

    /// Correlation matrix after rotating series `a` by `shifts[a]`.
    fn rotated(&self, shifts: &[usize]) -> Matrix {
        let mut c = Matrix::identity(self.m);
        let mut idx = 0;
        for a in 0..self.m {
            for b in (a + 1)..self.m {
                let d = (shifts[a] + self.len - shifts[b]) % self.len;
                let v = self.table[idx * self.len + d].clamp(-1.0, 1.0);
                c.set(a, b, v);
                c.set(b, a, v);
                idx += 1;
            }
        }
        c
    }
}

/// Circular rotation `w(t_j) → w(t_{(j − τ) mod L})`.
pub fn rotate(w: &[f64], tau: usize) -> Vec<f64> {
    let len = w.len();
    (0..len).map(|j| w[(j + len - tau % len) % len]).collect()
}

/// Eigenvalue spectra of `trials` independently rotated copies of the panel.
pub fn rotation_null_eigenvalues(
    gp: &GrowthPanel,
    opts: &RotationNullOptions,
    rng: RngStream,
) -> Result<Vec<Vec<f64>>> {
    if opts.trials == 0 {
        return Err(Error::invalid("rotation null needs at least one trial"));
    }
    let table = LaggedCorrelations::new(&gp.rates_norm);
    let n_prime = gp.n_prime();
    let m = gp.n_series();
    let run = |trial: usize| -> Result<Vec<f64>> {
        let shifts: Vec<usize> = match opts.shift {
            ShiftPolicy::Zero => vec![0; m],
            ShiftPolicy::Uniform => {
                let mut g = rng.substream(trial as u64).generator();
                (0..m).map(|_| g.index(n_prime)).collect()
            }
        };
        eigenvalues_symmetric(&table.rotated(&shifts))
    };
    #[cfg(feature = "parallel")]
    let out = (0..opts.trials).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let out = (0..opts.trials).map(run).collect();
    out
}

fn stats_or_point(xs: &[f64]) -> Result<SummaryStats> {
    if xs.len() >= 2 {
        summary_stats(xs, 0.95)
    } else {
        Ok(SummaryStats {
            mean: xs[0],
            std: 0.0,
            ci_low: xs[0],
            ci_high: xs[0],
        })
    }
}

/// Rotation null: each series is circularly shifted by an independent
/// uniform offset, destroying cross-correlation but keeping autocorrelation.
pub fn rotation_null(
    gp: &GrowthPanel,
    opts: &RotationNullOptions,
    rng: RngStream,
) -> Result<SignificanceReport> {
    let model = correlation_matrix(gp)?;
    let mut report = classify_significance(&model, &model.rmt_params());
    let spectra = rotation_null_eigenvalues(gp, opts, rng)?;
    let largest: Vec<f64> = spectra.iter().map(|s| s[0]).collect();
    let second: Vec<f64> = spectra.iter().map(|s| s[1.min(s.len() - 1)]).collect();
    let pooled: Vec<f64> = spectra.iter().flatten().copied().collect();
    let mut sorted = largest.clone();
    sorted.sort_by(f64::total_cmp);
    report.null_distribution = Some(RotationNull {
        trials: opts.trials,
        bin_width: opts.bin_width,
        eigenvalue_pdf: density_histogram(&pooled, opts.bin_width),
        largest: stats_or_point(&largest)?,
        second: stats_or_point(&second)?,
        largest_p999: quantile_sorted(&sorted, 0.999),
    });
    Ok(report)
}
