//! Browser demo: three interactive views over synthetic panels.
//!
//! Each exported function returns a JSON string that the page parses and
//! draws on a canvas.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use bcycle::factor::{correlation_matrix, mp_density};
use bcycle::leadlag::{phase_delay, VariablePair};
use bcycle::modes::{averaged_mode_series, project_modes, reconstruct_cycles};
use bcycle::numerics::RngStream;
use bcycle::spectrum::{averaged_power_spectrum, continuous_spectrum, find_peaks};
use bcycle::synthetic::{white_noise_growth, PlantedFactors, PlantedLag};
use bcycle::xspec::{coherency_phase, delay_in_months, EdgeMode};
use bcycle::Result;

const DENSITY_POINTS: usize = 160;

/// Sample eigenvalues of a panel with two planted factors of the given
/// strengths, next to the Marchenko–Pastur density.
pub fn eigen_vs_mp(
    n_goods: usize,
    n_prime: usize,
    strength1: f64,
    strength2: f64,
    seed: u64,
) -> Result<Value> {
    let rng = RngStream::new(seed, 0);
    let gp = if strength1 <= 0.0 && strength2 <= 0.0 {
        white_noise_growth(n_goods, n_prime, rng)?
    } else {
        PlantedFactors {
            n_goods,
            n_prime,
            strengths: [strength1.max(0.0), strength2.max(0.0)],
        }
        .growth(rng)?
    };
    let model = correlation_matrix(&gp)?;
    let p = model.rmt_params();
    let hi = p.lambda_plus;
    let lo = p.lambda_minus;
    let density: Vec<[f64; 2]> = (0..=DENSITY_POINTS)
        .map(|i| {
            let l = lo + (hi - lo) * i as f64 / DENSITY_POINTS as f64;
            [l, mp_density(l, &p)]
        })
        .collect();
    let above = model.eig.values.iter().filter(|&&l| l > hi).count();
    Ok(json!({
        "q": p.q,
        "lambda_plus": hi,
        "lambda_minus": lo,
        "eigenvalues": model.eig.values,
        "density": density,
        "above": above,
    }))
}

/// Averaged power spectrum of a panel carrying one cycle of period
/// `period` buried in white noise.
pub fn cycle_spectrum(n_goods: usize, n_prime: usize, period: f64, amplitude: f64, seed: u64) -> Result<Value> {
    let base = white_noise_growth(n_goods, n_prime, RngStream::new(seed, 0))?;
    let omega = 2.0 * std::f64::consts::PI / period;
    let raw: Vec<Vec<f64>> = base
        .rates_norm
        .iter()
        .map(|w| {
            w.iter()
                .enumerate()
                .map(|(j, x)| x + amplitude * (omega * (j + 1) as f64).cos())
                .collect()
        })
        .collect();
    let gp = bcycle::growth::GrowthPanel::from_rates(base.first_month(), n_goods, raw)?;
    let sp = averaged_power_spectrum(&gp)?;
    let t_max = (n_prime as f64).min(120.0);
    let cs = continuous_spectrum(&gp, 4.0, t_max, 0.05)?;
    let peaks = find_peaks(&cs, n_prime, 1.0, 3.0);
    let discrete: Vec<[f64; 2]> = sp.half_range.iter().map(|&k| [sp.period(k), sp.power[k]]).collect();
    let continuous: Vec<[f64; 2]> = cs.periods.iter().zip(&cs.values).map(|(a, b)| [*a, *b]).collect();
    Ok(json!({
        "n_prime": n_prime,
        "discrete": discrete,
        "continuous": continuous,
        "peaks": peaks,
    }))
}

/// Plants a shipment-to-production delay and recovers it from the two
/// leading modes and from the cross-spectrum of their averaged series.
pub fn lag_recovery(n_goods: usize, n_prime: usize, k: usize, lag: f64, noise: f64, seed: u64) -> Result<Value> {
    let planted = PlantedLag {
        lag_sp: lag,
        noise,
        ..PlantedLag::new(n_goods, n_prime, k)
    };
    let gp = planted.growth(RngStream::new(seed, 0))?;
    let model = correlation_matrix(&gp)?;
    let md = project_modes(&gp, &model)?;
    let cr = reconstruct_cycles(&md, &[1, 2], &[k])?;
    let est = phase_delay(&cr, VariablePair::SP, k)?;
    let series = averaged_mode_series(&md, &[1, 2])?;
    let xs = coherency_phase(
        &series[VariablePair::SP.leader.index()],
        &series[VariablePair::SP.follower.index()],
        11,
        0,
        EdgeMode::Circular,
    )?;
    let cross = delay_in_months(&xs, k)?;
    let cycles: Vec<Vec<f64>> = cr.averaged.iter().map(|v| v.sum.clone()).collect();
    Ok(json!({
        "period": est.period,
        "planted": lag,
        "phase_delay": est.delta_months,
        "cross_spectrum": cross,
        "kappa2": xs.kappa2[k],
        "level_90": xs.level_90,
        "cycles": {
            "production": cycles[0],
            "shipment": cycles[1],
            "inventory": cycles[2],
        },
    }))
}

fn respond(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = eigenVsMp)]
pub fn eigen_vs_mp_js(
    n_goods: usize,
    n_prime: usize,
    strength1: f64,
    strength2: f64,
    seed: u32,
) -> std::result::Result<String, JsError> {
    respond(eigen_vs_mp(n_goods, n_prime, strength1, strength2, seed.into()))
}

#[wasm_bindgen(js_name = cycleSpectrum)]
pub fn cycle_spectrum_js(
    n_goods: usize,
    n_prime: usize,
    period: f64,
    amplitude: f64,
    seed: u32,
) -> std::result::Result<String, JsError> {
    respond(cycle_spectrum(n_goods, n_prime, period, amplitude, seed.into()))
}

#[wasm_bindgen(js_name = lagRecovery)]
pub fn lag_recovery_js(
    n_goods: usize,
    n_prime: usize,
    k: usize,
    lag: f64,
    noise: f64,
    seed: u32,
) -> std::result::Result<String, JsError> {
    respond(lag_recovery(n_goods, n_prime, k, lag, noise, seed.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_factors_stand_above_the_bulk() {
        let v = eigen_vs_mp(21, 239, 11.45, 4.12, 1).unwrap();
        assert_eq!(v["above"], 2);
        assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 63);
        let noise = eigen_vs_mp(21, 239, 0.0, 0.0, 1).unwrap();
        assert!(noise["above"].as_u64().unwrap() <= 1);
    }

    #[test]
    fn spectrum_peaks_at_planted_period() {
        let v = cycle_spectrum(5, 239, 40.0, 0.8, 3).unwrap();
        let peaks = v["peaks"].as_array().unwrap();
        let top = peaks
            .iter()
            .max_by(|a, b| a["power"].as_f64().unwrap().total_cmp(&b["power"].as_f64().unwrap()))
            .unwrap();
        assert!((top["period"].as_f64().unwrap() - 40.0).abs() < 2.0);
    }

    #[test]
    fn lag_is_recovered() {
        let v = lag_recovery(10, 239, 4, 5.0, 0.3, 9).unwrap();
        assert!((v["phase_delay"].as_f64().unwrap() - 5.0).abs() < 0.5);
        assert_eq!(v["cross_spectrum"]["status"], "significant");
        assert_eq!(v["cycles"]["shipment"].as_array().unwrap().len(), 239);
    }
}
