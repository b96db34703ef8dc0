//! Log growth rates, per-series normalization, autocorrelation and smoothing.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::stats;
use crate::panel::{Panel, SeriesLabel, Variable, YearMonth};

/// Growth-rate panel. Series follow the panel order (`variable · G + good`);
/// growth index `j` covers the change from month `j` to month `j + 1` and is
/// dated by the later month.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthPanel {
    labels: Vec<SeriesLabel>,
    n_goods: usize,
    first_month: YearMonth,
    /// `r(t_j) = log10(S(t_{j+1}) / S(t_j))`
    pub rates_raw: Vec<Vec<f64>>,
    /// `w = (r − ⟨r⟩) / σ`, population σ.
    pub rates_norm: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

/// Per-series normalization constants, detachable from the panel they came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Normalization {
    pub labels: Vec<SeriesLabel>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

fn log_growth(levels: &[f64]) -> Vec<f64> {
    levels.windows(2).map(|w| (w[1] / w[0]).log10()).collect()
}

fn normalize(label: SeriesLabel, r: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    let mean = stats::mean(r);
    let std = stats::population_std(r);
    let scale = (r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64).sqrt();
    if !(std > 1e-12 * scale) {
        return Err(Error::DegenerateSeries(label.to_string()));
    }
    let w = r.iter().map(|x| (x - mean) / std).collect();
    Ok((w, mean, std))
}

impl GrowthPanel {
    /// Normalize raw growth rates; `raw[s]` is series `s` in panel order.
    pub fn from_rates(first_month: YearMonth, n_goods: usize, raw: Vec<Vec<f64>>) -> Result<Self> {
        if n_goods == 0 {
            return Err(Error::invalid("panel needs at least one good"));
        }
        if raw.len() != 3 * n_goods {
            return Err(Error::invalid(format!(
                "expected {} growth series, got {}",
                3 * n_goods,
                raw.len()
            )));
        }
        let n = raw[0].len();
        if n < 2 || raw.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("growth series must share a length of at least 2"));
        }
        let labels = crate::panel::series_labels(n_goods);
        let mut rates_norm = Vec::with_capacity(raw.len());
        let mut means = Vec::with_capacity(raw.len());
        let mut stds = Vec::with_capacity(raw.len());
        for (r, &label) in raw.iter().zip(&labels) {
            let (w, m, s) = normalize(label, r)?;
            rates_norm.push(w);
            means.push(m);
            stds.push(s);
        }
        Ok(Self {
            labels,
            n_goods,
            first_month,
            rates_raw: raw,
            rates_norm,
            means,
            stds,
        })
    }

    /// Growth rates normalized with externally supplied constants (e.g. frozen
    /// in-sample statistics). The result need not have zero mean or unit variance.
    pub fn with_normalization(
        first_month: YearMonth,
        raw: Vec<Vec<f64>>,
        norm: &Normalization,
    ) -> Result<Self> {
        if raw.len() != norm.labels.len() {
            return Err(Error::LabelMismatch(format!(
                "{} series against {} normalization entries",
                raw.len(),
                norm.labels.len()
            )));
        }
        let rates_norm = raw
            .iter()
            .zip(norm.means.iter().zip(&norm.stds))
            .map(|(r, (m, s))| r.iter().map(|x| (x - m) / s).collect())
            .collect();
        Ok(Self {
            labels: norm.labels.clone(),
            n_goods: norm.labels.len() / 3,
            first_month,
            rates_raw: raw,
            rates_norm,
            means: norm.means.clone(),
            stds: norm.stds.clone(),
        })
    }

    pub fn labels(&self) -> &[SeriesLabel] {
        &self.labels
    }

    pub fn n_goods(&self) -> usize {
        self.n_goods
    }

    pub fn n_series(&self) -> usize {
        self.labels.len()
    }

    /// `N′`, the number of growth observations per series.
    pub fn n_prime(&self) -> usize {
        self.rates_norm[0].len()
    }

    /// Month that dates growth index `j` (0-based).
    pub fn month(&self, j: usize) -> YearMonth {
        self.first_month.offset(j as i64)
    }

    pub fn first_month(&self) -> YearMonth {
        self.first_month
    }

    pub fn normalized(&self, s: usize) -> &[f64] {
        &self.rates_norm[s]
    }

    pub fn normalization(&self) -> Normalization {
        Normalization {
            labels: self.labels.clone(),
            means: self.means.clone(),
            stds: self.stds.clone(),
        }
    }

    /// Index range of one variable's block of series.
    pub fn block(&self, variable: Variable) -> std::ops::Range<usize> {
        let start = variable.index() * self.n_goods;
        start..start + self.n_goods
    }
}

/// Raw log10 growth rates of every series of a panel.
pub fn raw_rates(panel: &Panel) -> Vec<Vec<f64>> {
    (0..panel.n_series())
        .map(|s| log_growth(panel.series_at(s)))
        .collect()
}

pub fn to_growth(panel: &Panel) -> Result<GrowthPanel> {
    if panel.n_months() < 3 {
        return Err(Error::invalid(format!(
            "growth rates need at least 3 months, panel has {}",
            panel.n_months()
        )));
    }
    GrowthPanel::from_rates(panel.month(1), panel.n_goods(), raw_rates(panel))
}

/// `R(m) = (1/(L−m)) Σ_{j=1}^{L−m} w_j w_{j+m}` for `m = 0..=m_max`.
pub fn autocorrelation_series(w: &[f64], m_max: usize) -> Result<Vec<f64>> {
    let len = w.len();
    if m_max >= len {
        return Err(Error::invalid(format!(
            "autocorrelation lag {m_max} must be below the series length {len}"
        )));
    }
    Ok((0..=m_max)
        .map(|m| {
            let s: f64 = w[..len - m].iter().zip(&w[m..]).map(|(a, b)| a * b).sum();
            s / (len - m) as f64
        })
        .collect())
}

/// `(1/L) Σ_j w_j w_{(j+m) mod L}`, summed in sorted order so the result is
/// bit-identical for every rotation of `w`.
pub fn circular_autocorrelation(w: &[f64], m: usize) -> f64 {
    let len = w.len();
    let mut products: Vec<f64> = (0..len).map(|j| w[j] * w[(j + m) % len]).collect();
    products.sort_by(f64::total_cmp);
    products.iter().sum::<f64>() / len as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutocorrProfile {
    pub m_max: usize,
    pub per_series: Vec<Vec<f64>>,
    /// Goods-averaged profile for production, shipment, inventory.
    pub averaged: [Vec<f64>; 3],
}

pub const DEFAULT_AUTOCORR_LAGS: usize = 36;

pub fn autocorrelation(gp: &GrowthPanel, m_max: usize) -> Result<AutocorrProfile> {
    let n_prime = gp.n_prime();
    if m_max >= n_prime {
        return Err(Error::invalid(format!(
            "m_max {m_max} must be below N' = {n_prime}"
        )));
    }
    let per_series = gp
        .rates_norm
        .iter()
        .map(|w| {
            let mut r = autocorrelation_series(w, m_max)?;
            // unit variance by construction
            r[0] = 1.0;
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    let averaged = Variable::ALL.map(|v| {
        let block = &per_series[gp.block(v)];
        (0..=m_max)
            .map(|m| block.iter().map(|r| r[m]).sum::<f64>() / block.len() as f64)
            .collect()
    });
    Ok(AutocorrProfile {
        m_max,
        per_series,
        averaged,
    })
}

/// Centered simple moving average. `centers[i]` is the (possibly half-integer)
/// 0-based time index at the middle of window `i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MovingAverage {
    pub window: usize,
    pub centers: Vec<f64>,
    pub values: Vec<f64>,
}

pub const DEFAULT_MA_WINDOW: usize = 12;

pub fn moving_average(x: &[f64], window: usize) -> Result<MovingAverage> {
    if window == 0 || window > x.len() {
        return Err(Error::invalid(format!(
            "moving-average window {window} must be in 1..={}",
            x.len()
        )));
    }
    let half = (window - 1) as f64 / 2.0;
    let values: Vec<f64> = x
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect();
    let centers = (0..values.len()).map(|i| i as f64 + half).collect();
    Ok(MovingAverage {
        window,
        centers,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::GoodDescriptor;

    fn panel_from(series: Vec<Vec<f64>>) -> Panel {
        let g = series.len() / 3;
        Panel::from_series(
            YearMonth::new(1988, 1).unwrap(),
            GoodDescriptor::numbered(g),
            series,
        )
        .unwrap()
    }

    fn wiggle(n: usize, phase: f64) -> Vec<f64> {
        (0..n)
            .map(|t| 100.0 * (1.0 + 0.05 * ((t as f64) * 0.7 + phase).sin() + 0.001 * t as f64))
            .collect()
    }

    #[test]
    fn single_step_growth_rate() {
        let r = log_growth(&[100.0, 110.0]);
        // log10(1.1) to 16 digits
        assert!((r[0] - 0.041_392_685_158_225_04).abs() < 1e-15);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let mut series: Vec<Vec<f64>> = (0..3).map(|i| wiggle(20, i as f64)).collect();
        series[1] = vec![100.0; 20];
        let err = to_growth(&panel_from(series)).unwrap_err();
        match err {
            Error::DegenerateSeries(name) => assert_eq!(name, "shipment/1"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn normalized_series_have_zero_mean_unit_std() {
        let series: Vec<Vec<f64>> = (0..6).map(|i| wiggle(50, i as f64)).collect();
        let gp = to_growth(&panel_from(series)).unwrap();
        assert_eq!(gp.n_prime(), 49);
        assert_eq!(gp.month(0).to_string(), "1988-02");
        for w in &gp.rates_norm {
            assert!(stats::mean(w).abs() < 1e-12);
            assert!((stats::population_std(w) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn level_scaling_leaves_rates_unchanged() {
        let series: Vec<Vec<f64>> = (0..3).map(|i| wiggle(30, i as f64)).collect();
        let mut scaled = series.clone();
        scaled[2].iter_mut().for_each(|v| *v *= 7.5);
        let a = to_growth(&panel_from(series)).unwrap();
        let b = to_growth(&panel_from(scaled)).unwrap();
        for (x, y) in a.rates_norm[2].iter().zip(&b.rates_norm[2]) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn lag_zero_is_one_and_bounds_checked() {
        let series: Vec<Vec<f64>> = (0..3).map(|i| wiggle(40, i as f64)).collect();
        let gp = to_growth(&panel_from(series)).unwrap();
        let prof = autocorrelation(&gp, 5).unwrap();
        assert!(prof.per_series.iter().all(|r| r[0] == 1.0));
        assert!(prof.averaged.iter().all(|r| r[0] == 1.0));
        assert!(autocorrelation(&gp, 39).is_err());
    }

    #[test]
    fn alternating_series_lag_one() {
        // direct summation: every neighbouring product is −1, over N′−1 terms
        let w: Vec<f64> = (0..239).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let oracle: f64 = (0..238).map(|j| w[j] * w[j + 1]).sum::<f64>() / 238.0;
        let r = autocorrelation_series(&w, 1).unwrap();
        assert_eq!(r[1], oracle);
        assert_eq!(r[1], -1.0);
    }

    #[test]
    fn moving_average_cases() {
        let ma = moving_average(&[3.0; 20], 12).unwrap();
        assert_eq!(ma.values.len(), 9);
        assert!(ma.values.iter().all(|&v| (v - 3.0).abs() < 1e-15));

        let ramp: Vec<f64> = (0..20).map(|j| j as f64).collect();
        let odd = moving_average(&ramp, 5).unwrap();
        for (c, v) in odd.centers.iter().zip(&odd.values) {
            assert!((c - v).abs() < 1e-12);
        }
        let even = moving_average(&ramp, 12).unwrap();
        assert_eq!(even.centers[0], 5.5);
        for (c, v) in even.centers.iter().zip(&even.values) {
            assert!((c - v).abs() < 1e-12);
        }
        assert!(moving_average(&ramp, 21).is_err());
    }
}
