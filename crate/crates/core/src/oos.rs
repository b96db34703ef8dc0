//! Projection of an extended panel onto in-sample eigenvectors and the
//! month-by-month volatility split across modes.

use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::factor::CorrelationModel;
use crate::growth::{raw_rates, GrowthPanel};
use crate::modes::{check_labels, project};
use crate::panel::{Panel, YearMonth};

/// How out-of-sample growth rates are standardized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationPolicy {
    /// In-sample means and standard deviations.
    #[default]
    Frozen,
    /// Statistics recomputed over the extended window.
    Extended,
}

/// Months with total volatility below this carry no relative shares.
pub const MIN_VOLATILITY: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolatilityReport {
    pub normalization: NormalizationPolicy,
    pub months: Vec<YearMonth>,
    /// Index into `months` of the first month after the in-sample window.
    pub in_sample_boundary: usize,
    pub modes: Vec<usize>,
    /// `P(t) = Σ_n |a_n(t)|²`.
    pub total: Vec<f64>,
    /// `|a_n(t)|²` per selected mode.
    pub partial: Vec<Vec<f64>>,
    /// `π_n(t) = |a_n(t)|² / P(t)`.
    pub relative: Vec<Vec<Option<f64>>>,
    /// `a_n(t)` for every mode.
    #[serde(skip)]
    pub coefficients: Vec<Vec<f64>>,
}

pub fn project_out_of_sample(
    extended: &Panel,
    model: &CorrelationModel,
    in_sample: &GrowthPanel,
    modes: &[usize],
    policy: NormalizationPolicy,
) -> Result<VolatilityReport> {
    check_labels(&extended.labels(), &model.labels)?;
    check_labels(in_sample.labels(), &model.labels)?;
    if let Some(&n) = modes.iter().find(|&&n| n == 0 || n > model.m()) {
        return Err(Error::invalid(format!("mode {n} outside 1..={}", model.m())));
    }
    if extended.n_months() < 3 {
        return Err(Error::invalid("extended panel needs at least 3 months"));
    }
    let first = extended.month(1);
    let in_first = in_sample.first_month();
    let in_last = in_sample.month(in_sample.n_prime() - 1);
    let ext_last = extended.end_month();
    if first > in_first || ext_last < in_last {
        return Err(Error::invalid(format!(
            "extended growth range {first}..{ext_last} does not contain the in-sample range {in_first}..{in_last}"
        )));
    }
    let raw = raw_rates(extended);
    let gp = match policy {
        NormalizationPolicy::Frozen => {
            GrowthPanel::with_normalization(first, raw, &in_sample.normalization())?
        }
        NormalizationPolicy::Extended => GrowthPanel::from_rates(first, extended.n_goods(), raw)?,
    };
    let coefficients = project(&gp.rates_norm, &model.eig.vectors);
    let len = gp.n_prime();
    let total: Vec<f64> = (0..len)
        .map(|j| coefficients.iter().map(|a| a[j] * a[j]).sum())
        .collect();
    let partial: Vec<Vec<f64>> = modes
        .iter()
        .map(|&n| coefficients[n - 1].iter().map(|a| a * a).collect())
        .collect();
    let relative = partial
        .iter()
        .map(|p| {
            p.iter()
                .zip(&total)
                .map(|(x, &tot)| (tot >= MIN_VOLATILITY).then(|| x / tot))
                .collect()
        })
        .collect();
    let months: Vec<YearMonth> = (0..len).map(|j| gp.month(j)).collect();
    let in_sample_boundary = months.iter().position(|&m| m > in_last).unwrap_or(len);
    Ok(VolatilityReport {
        normalization: policy,
        months,
        in_sample_boundary,
        modes: modes.to_vec(),
        total,
        partial,
        relative,
        coefficients,
    })
}

/// A monthly series to show next to the volatility decomposition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxSeries {
    pub label: String,
    pub points: Vec<(YearMonth, f64)>,
}

/// Reads a `date,value` CSV.
pub fn read_aux_series<R: Read>(label: &str, input: R) -> Result<AuxSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["date", "value"] {
        return Err(Error::invalid(format!(
            "auxiliary series header must be 'date,value', got '{}'",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let month: YearMonth = rec[0].parse()?;
        let value: f64 = rec[1]
            .parse()
            .map_err(|_| Error::invalid(format!("bad value '{}' at {month}", &rec[1])))?;
        points.push((month, value));
    }
    points.sort_by_key(|p| p.0);
    if points.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(Error::invalid("auxiliary series repeats a month"));
    }
    Ok(AuxSeries {
        label: label.to_string(),
        points,
    })
}

pub fn load_aux_series(path: impl AsRef<Path>) -> Result<AuxSeries> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "aux".into());
    read_aux_series(&label, f)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlayRow {
    pub month: YearMonth,
    pub aux: f64,
    pub total: f64,
    pub relative: Vec<Option<f64>>,
}

/// Joins `aux` with the volatility report on their common months.
pub fn auxiliary_overlay(report: &VolatilityReport, aux: &AuxSeries) -> Result<Vec<OverlayRow>> {
    let rows: Vec<OverlayRow> = aux
        .points
        .iter()
        .filter_map(|&(month, value)| {
            let j = report.months.binary_search(&month).ok()?;
            Some(OverlayRow {
                month,
                aux: value,
                total: report.total[j],
                relative: report.relative.iter().map(|r| r[j]).collect(),
            })
        })
        .collect();
    if rows.is_empty() {
        return Err(Error::invalid(format!(
            "auxiliary series '{}' shares no month with the volatility report",
            aux.label
        )));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::correlation_matrix;
    use crate::growth::to_growth;
    use crate::modes::project_modes;
    use crate::numerics::RngStream;
    use crate::synthetic::{levels_from_rates, white_noise_rates};

    fn setup() -> (Panel, Panel) {
        let raw: Vec<Vec<f64>> = white_noise_rates(2, 60, RngStream::new(4, 0))
            .into_iter()
            .map(|r| r.into_iter().map(|x| 0.01 * x).collect())
            .collect();
        let full = levels_from_rates(YearMonth::new(2000, 1).unwrap(), &raw).unwrap();
        let inner = full.chop(41).unwrap();
        (full, inner)
    }

    #[test]
    fn in_sample_window_matches_mode_projection() {
        let (full, inner) = setup();
        let gp = to_growth(&inner).unwrap();
        let model = correlation_matrix(&gp).unwrap();
        let md = project_modes(&gp, &model).unwrap();
        let rep =
            project_out_of_sample(&full, &model, &gp, &[1, 2], NormalizationPolicy::Frozen).unwrap();
        assert_eq!(rep.in_sample_boundary, 40);
        assert_eq!(rep.months.len(), 60);
        for n in 0..6 {
            for j in 0..40 {
                assert!((rep.coefficients[n][j] - md.coefficients[n][j]).abs() < 1e-12);
            }
        }
        for j in 0..60 {
            let w2: f64 = (0..6)
                .map(|s| {
                    let r = to_growth(&full).unwrap().rates_raw[s][j];
                    ((r - gp.means[s]) / gp.stds[s]).powi(2)
                })
                .sum();
            assert!((rep.total[j] - w2).abs() < 1e-10 * w2.max(1.0));
        }
    }

    #[test]
    fn relative_shares_sum_to_one_over_all_modes() {
        let (full, inner) = setup();
        let gp = to_growth(&inner).unwrap();
        let model = correlation_matrix(&gp).unwrap();
        let all: Vec<usize> = (1..=6).collect();
        let rep =
            project_out_of_sample(&full, &model, &gp, &all, NormalizationPolicy::Extended).unwrap();
        for j in 0..60 {
            let s: f64 = rep.relative.iter().map(|r| r[j].unwrap()).sum();
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn shorter_extension_is_rejected() {
        let (full, inner) = setup();
        let gp = to_growth(&full).unwrap();
        let model = correlation_matrix(&gp).unwrap();
        assert!(
            project_out_of_sample(&inner, &model, &gp, &[1], NormalizationPolicy::Frozen).is_err()
        );
    }

    #[test]
    fn overlay_intersects_months() {
        let (full, inner) = setup();
        let gp = to_growth(&inner).unwrap();
        let model = correlation_matrix(&gp).unwrap();
        let rep =
            project_out_of_sample(&full, &model, &gp, &[1], NormalizationPolicy::Frozen).unwrap();
        let csv = "date,value\n1999-06,1.0\n2000-02,2.0\n2000-03,3.0\n";
        let aux = read_aux_series("x", csv.as_bytes()).unwrap();
        let rows = auxiliary_overlay(&rep, &aux).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].month, YearMonth::new(2000, 2).unwrap());
        assert_eq!(rows[0].total, rep.total[0]);
        let none = read_aux_series("x", "date,value\n1980-01,1\n".as_bytes()).unwrap();
        assert!(auxiliary_overlay(&rep, &none).is_err());
    }
}
