//! Phase delays between averaged variables and their reshuffle null.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factor::{correlation_of, sign_convention, CorrelationModel};
use crate::growth::GrowthPanel;
use crate::modes::{amplitude, check_labels, project, CycleReconstruction};
use crate::numerics::{
    dft_at_frequency, eig_symmetric, fourier_frequency, principal_arg, summary_stats, RngStream,
    SummaryStats,
};
use crate::panel::Variable;

/// `follower` lags `leader`; a positive delay means the follower peaks later.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct VariablePair {
    pub leader: Variable,
    pub follower: Variable,
}

impl VariablePair {
    /// Production behind shipments.
    pub const SP: VariablePair = VariablePair {
        leader: Variable::Shipment,
        follower: Variable::Production,
    };
    /// Inventory behind production.
    pub const PI: VariablePair = VariablePair {
        leader: Variable::Production,
        follower: Variable::Inventory,
    };

    pub fn reversed(self) -> Self {
        Self {
            leader: self.follower,
            follower: self.leader,
        }
    }

    /// Short tag such as `SP`.
    pub fn tag(self) -> String {
        let c = |v: Variable| match v {
            Variable::Production => 'P',
            Variable::Shipment => 'S',
            Variable::Inventory => 'I',
        };
        format!("{}{}", c(self.leader), c(self.follower))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LagEstimate {
    pub pair: VariablePair,
    pub k: usize,
    pub period: f64,
    /// In `(−T/2, T/2]`.
    pub delta_months: f64,
}

/// `Δ = (N′/k)(1/2π) Arg(Z_follower / Z_leader)`.
pub fn delay_from_amplitudes(
    z_follower: Complex64,
    z_leader: Complex64,
    n_prime: usize,
    k: usize,
) -> Result<f64> {
    if z_follower.norm() < 1e-12 || z_leader.norm() < 1e-12 {
        return Err(Error::UndefinedPhase(format!(
            "complex amplitude vanishes at k={k} (|Z| = {:e}, {:e})",
            z_follower.norm(),
            z_leader.norm()
        )));
    }
    let period = n_prime as f64 / k as f64;
    Ok(period / (2.0 * PI) * principal_arg(z_follower / z_leader))
}

pub fn phase_delay(cr: &CycleReconstruction, pair: VariablePair, k: usize) -> Result<LagEstimate> {
    let amps = cr.amplitudes_at(k).ok_or_else(|| {
        Error::invalid(format!(
            "wavenumber {k} not among the reconstructed {:?}",
            cr.wavenumbers
        ))
    })?;
    let z = |v: Variable| amps.variables[v.index()].z();
    let delta = delay_from_amplitudes(z(pair.follower), z(pair.leader), cr.n_prime, k)?;
    Ok(LagEstimate {
        pair,
        k,
        period: amps.period,
        delta_months: delta,
    })
}

/// `w′ = w − Σ_{n∈retained} a_n V^(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualPanel {
    pub retained: Vec<usize>,
    pub residual: Vec<Vec<f64>>,
    /// `Σ_{n∈retained} a_n(t) V_s^(n)`.
    pub retained_part: Vec<Vec<f64>>,
}

pub fn residual_panel(
    gp: &GrowthPanel,
    model: &CorrelationModel,
    retained: &[usize],
) -> Result<ResidualPanel> {
    check_labels(gp.labels(), &model.labels)?;
    if let Some(&n) = retained.iter().find(|&&n| n == 0 || n > model.m()) {
        return Err(Error::invalid(format!("mode {n} outside 1..={}", model.m())));
    }
    let vectors: Vec<Vec<f64>> = retained.iter().map(|&n| model.eig.vector(n - 1).to_vec()).collect();
    let coeffs = project(&gp.rates_norm, &vectors);
    let len = gp.n_prime();
    let mut retained_part = vec![vec![0.0; len]; gp.n_series()];
    for (a, v) in coeffs.iter().zip(&vectors) {
        for (s, row) in retained_part.iter_mut().enumerate() {
            for (x, &aj) in row.iter_mut().zip(a) {
                *x += aj * v[s];
            }
        }
    }
    let residual = gp
        .rates_norm
        .iter()
        .zip(&retained_part)
        .map(|(w, r)| w.iter().zip(r).map(|(a, b)| a - b).collect())
        .collect();
    Ok(ResidualPanel {
        retained: retained.to_vec(),
        residual,
        retained_part,
    })
}

/// Time permutation applied to each residual series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum PermutationPolicy {
    #[default]
    Uniform,
    /// Leaves every series untouched.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReshuffleOptions {
    pub trials: usize,
    pub modes: Vec<usize>,
    /// `(pair, k)` delays evaluated in every trial.
    pub targets: Vec<(VariablePair, usize)>,
    pub permutation: PermutationPolicy,
    /// Also require `|⟨V̂^(n), V^(n)⟩| ≥ min_overlap` for retained modes.
    pub min_overlap: Option<f64>,
    pub ci_level: f64,
    pub keep_samples: bool,
}

pub const MIN_RESHUFFLE_TRIALS: usize = 100;

impl Default for ReshuffleOptions {
    fn default() -> Self {
        Self {
            trials: 1000,
            modes: vec![1, 2],
            targets: default_targets(&[4, 6]),
            permutation: PermutationPolicy::Uniform,
            min_overlap: None,
            ci_level: 0.95,
            keep_samples: false,
        }
    }
}

/// SP and PI delays at each wavenumber.
pub fn default_targets(wavenumbers: &[usize]) -> Vec<(VariablePair, usize)> {
    [VariablePair::SP, VariablePair::PI]
        .iter()
        .flat_map(|&p| wavenumbers.iter().map(move |&k| (p, k)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagNull {
    pub pair: VariablePair,
    pub k: usize,
    pub period: f64,
    pub observed: f64,
    /// Eigenvectors re-estimated in each trial and matched to the originals.
    pub reestimated: SummaryStats,
    /// Original eigenvectors kept fixed.
    pub frozen: SummaryStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_reestimated: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_frozen: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloLagSummary {
    pub rng: RngStream,
    pub trials_requested: usize,
    pub trials_used: usize,
    pub trials_rejected: usize,
    pub acceptance_rate: f64,
    pub lambda_plus: f64,
    pub quantities: Vec<LagNull>,
}

struct TrialDelays {
    reestimated: Vec<f64>,
    frozen: Vec<f64>,
}

fn standardize(x: &mut [f64]) -> Result<()> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if !(var > 1e-24) {
        return Err(Error::SimulationDegenerate(
            "simulated series has zero variance".into(),
        ));
    }
    let sd = var.sqrt();
    x.iter_mut().for_each(|v| *v = (*v - mean) / sd);
    Ok(())
}

/// Delays for every target from mode vectors (retained order) applied to `w`.
fn delays_for(
    w: &[Vec<f64>],
    vectors: &[Vec<f64>],
    n_goods: usize,
    targets: &[(VariablePair, usize)],
) -> Result<Vec<f64>> {
    let len = w[0].len();
    let coeffs = project(w, vectors);
    let means: Vec<Vec<f64>> = Variable::ALL
        .iter()
        .map(|v| {
            let start = v.index() * n_goods;
            vectors
                .iter()
                .map(|vec| vec[start..start + n_goods].iter().sum::<f64>() / n_goods as f64)
                .collect()
        })
        .collect();
    let mut ks: Vec<usize> = targets.iter().map(|t| t.1).collect();
    ks.sort_unstable();
    ks.dedup();
    let mut fourier: Vec<(usize, Vec<Complex64>)> = Vec::with_capacity(ks.len());
    for &k in &ks {
        let omega = fourier_frequency(k, len);
        let c = coeffs
            .iter()
            .map(|a| dft_at_frequency(a, omega))
            .collect::<Result<Vec<_>>>()?;
        fourier.push((k, c));
    }
    targets
        .iter()
        .map(|&(pair, k)| {
            let c = &fourier.iter().find(|f| f.0 == k).expect("k collected above").1;
            let zf = amplitude(c, &means[pair.follower.index()]);
            let zl = amplitude(c, &means[pair.leader.index()]);
            delay_from_amplitudes(zf, zl, len, k)
        })
        .collect()
}

/// Greedy maximal-overlap matching of the original retained vectors against
/// the simulated eigenbasis, each sign-aligned to its original.
fn match_vectors(original: &[Vec<f64>], simulated: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut used = vec![false; simulated.len()];
    let mut out = Vec::with_capacity(original.len());
    let mut overlaps = Vec::with_capacity(original.len());
    for v in original {
        let (best, dot) = simulated
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, u)| (i, v.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()))
            .fold((usize::MAX, 0.0f64), |acc, (i, d)| {
                if acc.0 == usize::MAX || d.abs() > acc.1.abs() {
                    (i, d)
                } else {
                    acc
                }
            });
        used[best] = true;
        let sign = if dot < 0.0 { -1.0 } else { 1.0 };
        out.push(simulated[best].iter().map(|x| sign * x).collect());
        overlaps.push(dot.abs());
    }
    (out, overlaps)
}

/// Reshuffle null for phase delays: residual series outside the retained
/// modes are permuted in time, the retained part is added back, and trials
/// whose retained eigenvalues all stay above `λ₊` contribute delays.
pub fn reshuffle_significance(
    gp: &GrowthPanel,
    model: &CorrelationModel,
    opts: &ReshuffleOptions,
    rng: RngStream,
) -> Result<MonteCarloLagSummary> {
    if opts.trials < MIN_RESHUFFLE_TRIALS {
        return Err(Error::invalid(format!(
            "reshuffle needs at least {MIN_RESHUFFLE_TRIALS} trials, got {}",
            opts.trials
        )));
    }
    if opts.targets.is_empty() {
        return Err(Error::invalid("no delay targets requested"));
    }
    if let Some(&(_, k)) = opts.targets.iter().find(|t| t.1 == 0 || t.1 > gp.n_prime() / 2) {
        return Err(Error::invalid(format!("delay wavenumber {k} outside 1..=N'/2")));
    }
    let rp = residual_panel(gp, model, &opts.modes)?;
    let retained_vectors: Vec<Vec<f64>> = opts
        .modes
        .iter()
        .map(|&n| model.eig.vector(n - 1).to_vec())
        .collect();
    let n_goods = gp.n_goods();
    let lambda_plus = model.rmt_params().lambda_plus;
    let r = opts.modes.len();
    let observed = delays_for(&gp.rates_norm, &retained_vectors, n_goods, &opts.targets)?;

    let run = |trial: usize| -> Result<Option<TrialDelays>> {
        let mut g = rng.substream(trial as u64).generator();
        let mut sim: Vec<Vec<f64>> = Vec::with_capacity(gp.n_series());
        for (res, keep) in rp.residual.iter().zip(&rp.retained_part) {
            let mut shuffled = res.clone();
            if opts.permutation == PermutationPolicy::Uniform {
                g.shuffle(&mut shuffled);
            }
            let mut s: Vec<f64> = shuffled.iter().zip(keep).map(|(a, b)| a + b).collect();
            standardize(&mut s)?;
            sim.push(s);
        }
        let eig = eig_symmetric(&correlation_of(&sim), &sign_convention(n_goods))?;
        if eig.values.iter().take(r).any(|&l| l <= lambda_plus) {
            return Ok(None);
        }
        let (matched, overlaps) = match_vectors(&retained_vectors, &eig.vectors);
        if let Some(min) = opts.min_overlap {
            if overlaps.iter().any(|&o| o < min) {
                return Ok(None);
            }
        }
        let reestimated = match delays_for(&sim, &matched, n_goods, &opts.targets) {
            Ok(d) => d,
            Err(Error::UndefinedPhase(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        let frozen = match delays_for(&sim, &retained_vectors, n_goods, &opts.targets) {
            Ok(d) => d,
            Err(Error::UndefinedPhase(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        Ok(Some(TrialDelays {
            reestimated,
            frozen,
        }))
    };

    #[cfg(feature = "parallel")]
    let results: Vec<Result<Option<TrialDelays>>> = (0..opts.trials).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<Option<TrialDelays>>> = (0..opts.trials).map(run).collect();

    let mut accepted = Vec::new();
    for r in results {
        if let Some(t) = r? {
            accepted.push(t);
        }
    }
    let used = accepted.len();
    if used < 2 {
        return Err(Error::SimulationDegenerate(format!(
            "{used} of {} reshuffle trials kept {r} eigenvalues above lambda+ = {lambda_plus:.4}",
            opts.trials
        )));
    }

    let quantities = opts
        .targets
        .iter()
        .enumerate()
        .map(|(i, &(pair, k))| {
            let re: Vec<f64> = accepted.iter().map(|t| t.reestimated[i]).collect();
            let fr: Vec<f64> = accepted.iter().map(|t| t.frozen[i]).collect();
            Ok(LagNull {
                pair,
                k,
                period: gp.n_prime() as f64 / k as f64,
                observed: observed[i],
                reestimated: summary_stats(&re, opts.ci_level)?,
                frozen: summary_stats(&fr, opts.ci_level)?,
                samples_reestimated: opts.keep_samples.then_some(re),
                samples_frozen: opts.keep_samples.then_some(fr),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(MonteCarloLagSummary {
        rng,
        trials_requested: opts.trials,
        trials_used: used,
        trials_rejected: opts.trials - used,
        acceptance_rate: used as f64 / opts.trials as f64,
        lambda_plus,
        quantities,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::correlation_matrix;
    use crate::modes::{project_modes, reconstruct_cycles};
    use crate::synthetic::planted_lag_growth;

    #[test]
    fn pair_tags_and_reversal() {
        assert_eq!(VariablePair::SP.tag(), "SP");
        assert_eq!(VariablePair::PI.tag(), "PI");
        assert_eq!(VariablePair::SP.reversed().reversed(), VariablePair::SP);
    }

    #[test]
    fn real_ratio_gives_zero_or_half_period() {
        let d = delay_from_amplitudes(Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0), 240, 4)
            .unwrap();
        assert_eq!(d, 0.0);
        let d = delay_from_amplitudes(Complex64::new(-2.0, 0.0), Complex64::new(1.0, 0.0), 240, 4)
            .unwrap();
        assert!((d - 30.0).abs() < 1e-12);
        assert!(matches!(
            delay_from_amplitudes(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), 240, 4),
            Err(Error::UndefinedPhase(_))
        ));
    }

    #[test]
    fn residual_has_no_retained_component() {
        let gp = planted_lag_growth(4, 120, 4, 0.3, RngStream::new(3, 0)).unwrap();
        let model = correlation_matrix(&gp).unwrap();
        let rp = residual_panel(&gp, &model, &[1, 2]).unwrap();
        for n in 0..2 {
            let v = model.eig.vector(n);
            for j in 0..120 {
                let p: f64 = rp.residual.iter().zip(v).map(|(w, vs)| w[j] * vs).sum();
                assert!(p.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn identity_permutation_reproduces_observed() {
        let gp = planted_lag_growth(4, 120, 4, 0.3, RngStream::new(5, 0)).unwrap();
        let model = correlation_matrix(&gp).unwrap();
        let opts = ReshuffleOptions {
            trials: 100,
            targets: default_targets(&[4]),
            permutation: PermutationPolicy::Identity,
            ..Default::default()
        };
        let out = reshuffle_significance(&gp, &model, &opts, RngStream::new(1, 9)).unwrap();
        assert_eq!(out.trials_used + out.trials_rejected, 100);
        assert_eq!(out.trials_used, 100);
        for q in &out.quantities {
            assert!((q.frozen.mean - q.observed).abs() < 1e-9);
            assert!((q.reestimated.mean - q.observed).abs() < 1e-9);
            assert!(q.frozen.std < 1e-9);
        }

        let md = project_modes(&gp, &model).unwrap();
        let cr = reconstruct_cycles(&md, &[1, 2], &[4]).unwrap();
        let direct = phase_delay(&cr, VariablePair::SP, 4).unwrap();
        assert!((direct.delta_months - out.quantities[0].observed).abs() < 1e-9);
    }

    #[test]
    fn too_few_trials_rejected() {
        let gp = planted_lag_growth(2, 60, 2, 0.3, RngStream::new(5, 0)).unwrap();
        let model = correlation_matrix(&gp).unwrap();
        let opts = ReshuffleOptions {
            trials: 99,
            ..Default::default()
        };
        assert!(reshuffle_significance(&gp, &model, &opts, RngStream::new(1, 1)).is_err());
    }
}
