//! Projection of the growth panel onto correlation eigenvectors, the
//! per-mode split of the power spectrum, and band-limited cycle
//! reconstruction from selected modes and wavenumbers.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::CorrelationModel;
use crate::growth::GrowthPanel;
use crate::numerics::{dft_forward, principal_arg, ComplexSeries};
use crate::panel::{SeriesLabel, Variable};

/// Mode indices in the public API are 1-based; the vectors below are
/// indexed by `mode − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecomposition {
    pub labels: Vec<SeriesLabel>,
    pub n_goods: usize,
    pub n_prime: usize,
    pub eigenvalues: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    /// `a_n(t_j) = Σ_s w_s(t_j) V_s^(n)`.
    pub coefficients: Vec<Vec<f64>>,
    /// `ã_n(ω_k)`.
    pub fourier: Vec<ComplexSeries>,
    /// `λ^(n)(ω_k) = |ã_n(ω_k)|²`.
    pub mode_power: Vec<Vec<f64>>,
}

impl ModeDecomposition {
    pub fn m(&self) -> usize {
        self.labels.len()
    }

    /// `V̄_α^(n)`, the mean of mode `n`'s components over the goods of one variable.
    pub fn mean_component(&self, mode: usize, variable: Variable) -> f64 {
        let g = self.n_goods;
        let start = variable.index() * g;
        self.vectors[mode - 1][start..start + g].iter().sum::<f64>() / g as f64
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode == 0 || mode > self.m() {
            return Err(Error::invalid(format!(
                "mode {mode} outside 1..={}",
                self.m()
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_labels(have: &[SeriesLabel], want: &[SeriesLabel]) -> Result<()> {
    if have.len() != want.len() {
        return Err(Error::LabelMismatch(format!(
            "{} series against a model of {}",
            have.len(),
            want.len()
        )));
    }
    if let Some((a, b)) = have.iter().zip(want).find(|(a, b)| a != b) {
        return Err(Error::LabelMismatch(format!("series {a} where the model has {b}")));
    }
    Ok(())
}

/// `a_n(t_j)` for every mode, projecting the rows of `w` onto `vectors`.
pub(crate) fn project(w: &[Vec<f64>], vectors: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let len = w[0].len();
    vectors
        .iter()
        .map(|v| {
            let mut a = vec![0.0; len];
            for (ws, &vs) in w.iter().zip(v) {
                if vs == 0.0 {
                    continue;
                }
                for (aj, &x) in a.iter_mut().zip(ws) {
                    *aj += vs * x;
                }
            }
            a
        })
        .collect()
}

pub fn project_modes(gp: &GrowthPanel, model: &CorrelationModel) -> Result<ModeDecomposition> {
    check_labels(gp.labels(), &model.labels)?;
    let coefficients = project(&gp.rates_norm, &model.eig.vectors);
    let fourier = coefficients
        .iter()
        .map(|a| dft_forward(a))
        .collect::<Result<Vec<_>>>()?;
    let mode_power = fourier.iter().map(|f| f.power()).collect();
    Ok(ModeDecomposition {
        labels: model.labels.clone(),
        n_goods: model.n_goods,
        n_prime: gp.n_prime(),
        eigenvalues: model.eig.values.clone(),
        vectors: model.eig.vectors.clone(),
        coefficients,
        fourier,
        mode_power,
    })
}

/// Per-mode spectra `λ^(n)(ω_k)`, `k = 0..N′−1`.
pub fn mode_power_spectrum(md: &ModeDecomposition) -> &[Vec<f64>] {
    &md.mode_power
}

/// `p(ω_k) = (1/M) Σ_n λ^(n)(ω_k)`.
pub fn power_from_modes(md: &ModeDecomposition) -> Vec<f64> {
    let m = md.m() as f64;
    (0..md.n_prime)
        .map(|k| md.mode_power.iter().map(|p| p[k]).sum::<f64>() / m)
        .collect()
}

/// `w̄_α(t_j) = Σ_{n∈modes} a_n(t_j) V̄_α^(n)` at every frequency, one series per variable.
pub fn averaged_mode_series(md: &ModeDecomposition, modes: &[usize]) -> Result<Vec<Vec<f64>>> {
    for &n in modes {
        md.check_mode(n)?;
    }
    Ok(Variable::ALL
        .iter()
        .map(|&var| {
            let mut out = vec![0.0; md.n_prime];
            for &n in modes {
                let vbar = md.mean_component(n, var);
                for (o, a) in out.iter_mut().zip(&md.coefficients[n - 1]) {
                    *o += a * vbar;
                }
            }
            out
        })
        .collect())
}

/// Ascending period edges; bin `i` is `(edges[i], edges[i+1]]` in months.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodBins {
    pub edges: Vec<f64>,
}

impl PeriodBins {
    pub fn new(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("period bin edges must be strictly increasing"));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::invalid("period bin edges must be finite"));
        }
        Ok(Self { edges })
    }

    /// One bin per wavenumber for `k ≤ 12`, then bins whose edges shrink by a
    /// factor 1.25 down past the shortest period of two months.
    pub fn default_for(n_prime: usize) -> Self {
        let n = n_prime as f64;
        let mut desc: Vec<f64> = (0..=12).map(|k| n / (k as f64 + 0.5)).collect();
        let mut last = *desc.last().expect("nonempty");
        while last >= 2.0 {
            last /= 1.25;
            desc.push(last);
        }
        desc.reverse();
        Self { edges: desc }
    }

    fn covers(&self, n_prime: usize) -> Result<()> {
        let shortest = n_prime as f64 / (n_prime / 2) as f64;
        if !(self.edges[0] < shortest && *self.edges.last().expect("nonempty") >= n_prime as f64)
        {
            return Err(Error::invalid(format!(
                "period bins [{}, {}] do not cover ({shortest}, {n_prime}]",
                self.edges[0],
                self.edges.last().expect("nonempty")
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinContribution {
    pub period_low: f64,
    pub period_high: f64,
    pub wavenumbers: Vec<usize>,
    /// `Σ_{k∈bin} λ^(n)(ω_k) / Σ_{k∈bin} M p(ω_k)` per selected mode; `None` for empty bins.
    pub per_mode: Option<Vec<f64>>,
    pub combined: Option<f64>,
}

pub fn binned_relative_contribution(
    md: &ModeDecomposition,
    bins: &PeriodBins,
    modes: &[usize],
) -> Result<Vec<BinContribution>> {
    bins.covers(md.n_prime)?;
    for &n in modes {
        md.check_mode(n)?;
    }
    let n_prime = md.n_prime as f64;
    let total: Vec<f64> = (0..md.n_prime)
        .map(|k| md.mode_power.iter().map(|p| p[k]).sum())
        .collect();
    Ok(bins
        .edges
        .windows(2)
        .map(|e| {
            let (lo, hi) = (e[0], e[1]);
            let ks: Vec<usize> = (1..=md.n_prime / 2)
                .filter(|&k| {
                    let t = n_prime / k as f64;
                    t > lo && t <= hi
                })
                .collect();
            let denom: f64 = ks.iter().map(|&k| total[k]).sum();
            let per_mode = (!ks.is_empty() && denom > 0.0).then(|| {
                modes
                    .iter()
                    .map(|&n| ks.iter().map(|&k| md.mode_power[n - 1][k]).sum::<f64>() / denom)
                    .collect::<Vec<f64>>()
            });
            let combined = per_mode.as_ref().map(|v| v.iter().sum());
            BinContribution {
                period_low: lo,
                period_high: hi,
                wavenumbers: ks,
                per_mode,
                combined,
            }
        })
        .collect())
}

/// Complex amplitude `Z_α = Σ_{n∈modes} ã_n(ω_k) V̄_α^(n) = A_α e^{iφ_α}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariableAmplitude {
    pub variable: Variable,
    pub re: f64,
    pub im: f64,
    pub amplitude: f64,
    pub phase: f64,
}

impl VariableAmplitude {
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodAmplitudes {
    pub k: usize,
    pub period: f64,
    pub variables: [VariableAmplitude; 3],
}

/// Averaged series `w̄_α(t_j)` of one variable, split by mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableCycle {
    pub variable: Variable,
    /// One series per selected mode, in the order of `CycleReconstruction::modes`.
    pub per_mode: Vec<Vec<f64>>,
    pub sum: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReconstruction {
    pub n_prime: usize,
    pub n_goods: usize,
    pub modes: Vec<usize>,
    pub wavenumbers: Vec<usize>,
    /// Reconstructed `w_s(t_j)` for every series.
    pub series: Vec<Vec<f64>>,
    pub averaged: Vec<VariableCycle>,
    /// `mean_components[α][i] = V̄_α^(modes[i])`.
    pub mean_components: Vec<Vec<f64>>,
    pub amplitudes: Vec<PeriodAmplitudes>,
}

impl CycleReconstruction {
    pub fn amplitudes_at(&self, k: usize) -> Option<&PeriodAmplitudes> {
        self.amplitudes.iter().find(|a| a.k == k)
    }

    pub fn averaged(&self, variable: Variable) -> &VariableCycle {
        &self.averaged[variable.index()]
    }
}

/// `Z_α` at one wavenumber from the coefficients and mean eigenvector components.
pub(crate) fn amplitude(coeffs: &[Complex64], means: &[f64]) -> Complex64 {
    coeffs.iter().zip(means).map(|(a, v)| a * v).sum()
}

pub(crate) fn variable_amplitudes(coeffs: &[Complex64], means: &[Vec<f64>]) -> [VariableAmplitude; 3] {
    Variable::ALL.map(|variable| {
        let z = amplitude(coeffs, &means[variable.index()]);
        VariableAmplitude {
            variable,
            re: z.re,
            im: z.im,
            amplitude: z.norm(),
            phase: principal_arg(z),
        }
    })
}

fn validate_wavenumbers(wavenumbers: &[usize], n_prime: usize) -> Result<Vec<usize>> {
    let mut ks = wavenumbers.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(Error::invalid("no wavenumbers selected"));
    }
    if ks[0] == 0 {
        return Err(Error::invalid(
            "wavenumber 0 carries no signal in a normalized panel",
        ));
    }
    if let Some(&k) = ks.iter().find(|&&k| k > n_prime / 2) {
        return Err(Error::invalid(format!(
            "wavenumber {k} above N'/2 = {}",
            n_prime / 2
        )));
    }
    Ok(ks)
}

/// Band-limited part of `a_n(t_j)`:
/// `(2/√N′) Σ_k Re(ã_n(ω_k) e^{−iω_k t_j})`, with the Nyquist term taken once.
fn band_limited(fourier: &ComplexSeries, ks: &[usize], n_prime: usize) -> Vec<f64> {
    let l = n_prime as f64;
    let mut out = vec![0.0; n_prime];
    for &k in ks {
        let c = fourier.get(k);
        let weight = if 2 * k == n_prime { 1.0 } else { 2.0 } / l.sqrt();
        let omega = 2.0 * std::f64::consts::PI * k as f64 / l;
        for (j, o) in out.iter_mut().enumerate() {
            let t = (j + 1) as f64;
            let e = Complex64::from_polar(1.0, -omega * t);
            *o += weight * (c * e).re;
        }
    }
    out
}

pub fn reconstruct_cycles(
    md: &ModeDecomposition,
    modes: &[usize],
    wavenumbers: &[usize],
) -> Result<CycleReconstruction> {
    if modes.is_empty() {
        return Err(Error::invalid("no modes selected"));
    }
    for &n in modes {
        md.check_mode(n)?;
    }
    let ks = validate_wavenumbers(wavenumbers, md.n_prime)?;
    let g = md.n_goods;
    let m = md.m();

    let mode_parts: Vec<Vec<f64>> = modes
        .iter()
        .map(|&n| band_limited(&md.fourier[n - 1], &ks, md.n_prime))
        .collect();

    let mut series = vec![vec![0.0; md.n_prime]; m];
    for (part, &n) in mode_parts.iter().zip(modes) {
        let v = &md.vectors[n - 1];
        for (s, row) in series.iter_mut().enumerate() {
            for (x, &p) in row.iter_mut().zip(part) {
                *x += p * v[s];
            }
        }
    }

    let mean_components: Vec<Vec<f64>> = Variable::ALL
        .iter()
        .map(|&var| modes.iter().map(|&n| md.mean_component(n, var)).collect())
        .collect();

    let averaged = Variable::ALL
        .iter()
        .map(|&variable| {
            let means = &mean_components[variable.index()];
            let per_mode: Vec<Vec<f64>> = mode_parts
                .iter()
                .zip(means)
                .map(|(part, &vbar)| part.iter().map(|p| p * vbar).collect())
                .collect();
            let sum = (0..md.n_prime)
                .map(|j| per_mode.iter().map(|s| s[j]).sum())
                .collect();
            VariableCycle {
                variable,
                per_mode,
                sum,
            }
        })
        .collect();
    debug_assert_eq!(g * 3, m);

    let amplitudes = ks
        .iter()
        .map(|&k| {
            let coeffs: Vec<Complex64> = modes.iter().map(|&n| md.fourier[n - 1].get(k)).collect();
            PeriodAmplitudes {
                k,
                period: md.n_prime as f64 / k as f64,
                variables: variable_amplitudes(&coeffs, &mean_components),
            }
        })
        .collect();

    Ok(CycleReconstruction {
        n_prime: md.n_prime,
        n_goods: g,
        modes: modes.to_vec(),
        wavenumbers: ks,
        series,
        averaged,
        mean_components,
        amplitudes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::correlation_matrix;
    use crate::panel::YearMonth;

    fn panel(n_goods: usize, len: usize) -> GrowthPanel {
        let raw: Vec<Vec<f64>> = (0..3 * n_goods)
            .map(|s| {
                (0..len)
                    .map(|j| (((j * (s + 5) + s * s + j * j) % 17) as f64).sin() + 0.1 * s as f64)
                    .collect()
            })
            .collect();
        GrowthPanel::from_rates(YearMonth::new(1990, 1).unwrap(), n_goods, raw).unwrap()
    }

    #[test]
    fn projection_reconstructs_panel() {
        let gp = panel(3, 40);
        let model = correlation_matrix(&gp).unwrap();
        let md = project_modes(&gp, &model).unwrap();
        for s in 0..9 {
            for j in 0..40 {
                let back: f64 = (0..9).map(|n| md.coefficients[n][j] * md.vectors[n][s]).sum();
                assert!((back - gp.rates_norm[s][j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn coefficients_are_uncorrelated_with_eigenvalue_variance() {
        let gp = panel(3, 50);
        let model = correlation_matrix(&gp).unwrap();
        let md = project_modes(&gp, &model).unwrap();
        for n in 0..9 {
            for n2 in 0..9 {
                let c: f64 = md.coefficients[n]
                    .iter()
                    .zip(&md.coefficients[n2])
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
                    / 50.0;
                let want = if n == n2 { md.eigenvalues[n] } else { 0.0 };
                assert!((c - want).abs() < 1e-10, "n={n} n2={n2} c={c}");
            }
        }
    }

    #[test]
    fn label_mismatch_is_rejected() {
        let gp = panel(3, 40);
        let other = panel(2, 40);
        let model = correlation_matrix(&other).unwrap();
        assert!(matches!(
            project_modes(&gp, &model),
            Err(Error::LabelMismatch(_))
        ));
    }

    #[test]
    fn full_reconstruction_recovers_panel() {
        for len in [40, 41] {
            let gp = panel(2, len);
            let model = correlation_matrix(&gp).unwrap();
            let md = project_modes(&gp, &model).unwrap();
            let all_modes: Vec<usize> = (1..=6).collect();
            let all_k: Vec<usize> = (1..=len / 2).collect();
            let cr = reconstruct_cycles(&md, &all_modes, &all_k).unwrap();
            for s in 0..6 {
                for j in 0..len {
                    assert!((cr.series[s][j] - gp.rates_norm[s][j]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn wavenumber_validation() {
        let gp = panel(2, 40);
        let md = project_modes(&gp, &correlation_matrix(&gp).unwrap()).unwrap();
        assert!(reconstruct_cycles(&md, &[1], &[0]).is_err());
        assert!(reconstruct_cycles(&md, &[1], &[21]).is_err());
        assert!(reconstruct_cycles(&md, &[7], &[2]).is_err());
        assert!(reconstruct_cycles(&md, &[1], &[20]).is_ok());
    }

    #[test]
    fn default_bins_cover_half_range() {
        let b = PeriodBins::default_for(239);
        assert!(b.edges[0] < 2.0);
        assert!((b.edges.last().unwrap() - 478.0).abs() < 1e-12);
        assert!(b.covers(239).is_ok());
        assert!(PeriodBins::new(vec![3.0, 2.0]).is_err());
    }

    #[test]
    fn single_bin_gives_global_share() {
        let gp = panel(3, 40);
        let md = project_modes(&gp, &correlation_matrix(&gp).unwrap()).unwrap();
        let bins = PeriodBins::new(vec![1.0, 40.0]).unwrap();
        let out = binned_relative_contribution(&md, &bins, &[1, 2]).unwrap();
        let share = out[0].per_mode.as_ref().unwrap();
        let ks = 1..=20;
        let num: f64 = ks.clone().map(|k| md.mode_power[0][k]).sum();
        let den: f64 = ks.map(|k| md.mode_power.iter().map(|p| p[k]).sum::<f64>()).sum();
        assert!((share[0] - num / den).abs() < 1e-12);
    }
}
