//! End-to-end batch run: configuration, stage orchestration, and the files
//! each stage writes.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::factor::{
    classify_significance, correlation_matrix, rotation_null, CorrelationModel, RotationNullOptions,
    ShiftPolicy, SignificanceReport,
};
use crate::growth::{autocorrelation, to_growth, GrowthPanel, DEFAULT_AUTOCORR_LAGS};
use crate::leadlag::{
    default_targets, phase_delay, reshuffle_significance, MonteCarloLagSummary,
    PermutationPolicy, ReshuffleOptions, VariablePair,
};
use crate::modes::{
    averaged_mode_series, binned_relative_contribution, project_modes, reconstruct_cycles,
    ModeDecomposition, PeriodBins,
};
use crate::numerics::RngStream;
use crate::oos::{auxiliary_overlay, load_aux_series, project_out_of_sample, NormalizationPolicy};
use crate::panel::{format_sig12, load_goods, load_panel, save_goods, write_panel, LoadOptions, Panel, YearMonth};
use crate::report::{
    num, opt_num, round_json, InputDigest, OutputDir, RunMeta, Table, SUMMARY_DIGITS,
    SUMMARY_SCHEMA_VERSION,
};
use crate::spectrum::{
    averaged_power_spectrum, chopped_spectra, continuous_spectrum, default_chops, find_peaks,
    DEFAULT_CONTINUOUS_STEP, DEFAULT_MIN_CYCLES,
};
use crate::xspec::{coherency_phase, delay_in_months, EdgeMode, DEFAULT_SPAN};

pub const OUT_DIR_ENV: &str = "BCYCLE_OUT_DIR";

/// Stream ids of the two simulations under the master seed.
const ROTATION_STREAM: u64 = 1;
const RESHUFFLE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuousGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub step: f64,
}

impl Default for ContinuousGrid {
    fn default() -> Self {
        Self {
            t_min: 24.0,
            t_max: 120.0,
            step: DEFAULT_CONTINUOUS_STEP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Long-format panel CSV.
    pub input: Option<PathBuf>,
    /// Goods table CSV.
    pub goods: Option<PathBuf>,
    /// Panel extending past the in-sample window.
    pub extended: Option<PathBuf>,
    /// Last in-sample month; later months of `input` become the extension.
    pub in_sample_end: Option<YearMonth>,
    /// `date,value` series joined to the volatility report.
    pub aux: Option<PathBuf>,
    pub interpolate_gaps: bool,
    pub seasonally_adjusted: bool,
    pub seed: u64,
    /// Reshuffle trials for the delay null; 0 skips it.
    pub trials: usize,
    /// Rotation trials for the eigenvalue null; 0 skips it.
    pub null_trials: usize,
    pub null_bin_width: f64,
    pub chops: Vec<usize>,
    pub continuous: ContinuousGrid,
    /// Multiplier applied to written spectrum power columns, for overlays.
    pub spectrum_scale: f64,
    pub peak_prominence: f64,
    pub min_cycles: f64,
    pub autocorr_lags: usize,
    pub modes: Vec<usize>,
    pub wavenumbers: Vec<usize>,
    /// Period-bin edges; the default layout when absent.
    pub bins: Option<Vec<f64>>,
    pub span: usize,
    pub shift_sp: i64,
    pub shift_pi: i64,
    pub smoothing: EdgeMode,
    /// Headline delay null uses the original eigenvectors instead of re-estimated ones.
    pub freeze_eigenvectors: bool,
    /// Extra reshuffle acceptance condition on eigenvector overlap.
    pub min_overlap: Option<f64>,
    pub normalization: NormalizationPolicy,
    pub write_null_samples: bool,
    /// Not part of the hashed configuration.
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            goods: None,
            extended: None,
            in_sample_end: None,
            aux: None,
            interpolate_gaps: false,
            seasonally_adjusted: true,
            seed: 20_100_101,
            trials: 1000,
            null_trials: 1000,
            null_bin_width: 0.02,
            chops: default_chops(),
            continuous: ContinuousGrid::default(),
            spectrum_scale: 1.0,
            peak_prominence: 1.0,
            min_cycles: DEFAULT_MIN_CYCLES,
            autocorr_lags: DEFAULT_AUTOCORR_LAGS,
            modes: vec![1, 2],
            wavenumbers: vec![4, 6],
            bins: None,
            span: DEFAULT_SPAN,
            shift_sp: 0,
            shift_pi: 8,
            smoothing: EdgeMode::Circular,
            freeze_eigenvectors: false,
            min_overlap: None,
            normalization: NormalizationPolicy::Frozen,
            write_null_samples: false,
            out_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Compact JSON of everything but the output location.
    pub fn canonical_json(&self) -> Result<String> {
        let mut c = self.clone();
        c.out_dir = None;
        Ok(serde_json::to_string(&c)?)
    }

    /// `out_dir`, else `$BCYCLE_OUT_DIR`, else `./bcycle-out`.
    pub fn resolved_out_dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("bcycle-out"))
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.is_none() {
            return Err(Error::Config("no input panel given".into()));
        }
        if self.modes.is_empty() || self.modes.contains(&0) {
            return Err(Error::Config("modes must be a nonempty list of 1-based indices".into()));
        }
        if self.wavenumbers.is_empty() || self.wavenumbers.contains(&0) {
            return Err(Error::Config("wavenumbers must be nonempty and positive".into()));
        }
        if !(self.null_bin_width > 0.0) {
            return Err(Error::Config("null_bin_width must be positive".into()));
        }
        if !(self.spectrum_scale.is_finite() && self.spectrum_scale > 0.0) {
            return Err(Error::Config("spectrum_scale must be positive".into()));
        }
        if let Some(o) = self.min_overlap {
            if !(0.0..=1.0).contains(&o) {
                return Err(Error::Config("min_overlap must lie in [0, 1]".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Spectrum,
    Factors,
    Modes,
    Leadlag,
    Xspec,
    Oos,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Ingest,
        Stage::Spectrum,
        Stage::Factors,
        Stage::Modes,
        Stage::Leadlag,
        Stage::Xspec,
        Stage::Oos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Spectrum => "spectrum",
            Stage::Factors => "factors",
            Stage::Modes => "modes",
            Stage::Leadlag => "leadlag",
            Stage::Xspec => "xspec",
            Stage::Oos => "oos",
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub summary: Value,
}

struct Inputs {
    panel: Panel,
    extended: Option<Panel>,
    digests: Vec<InputDigest>,
}

fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    let input = cfg.input.as_ref().expect("validated");
    let mut digests = vec![InputDigest::of_file(input)?];
    let goods = match &cfg.goods {
        Some(p) => {
            digests.push(InputDigest::of_file(p)?);
            Some(load_goods(p)?)
        }
        None => None,
    };
    let opts = LoadOptions {
        interpolate_gaps: cfg.interpolate_gaps,
        seasonally_adjusted: cfg.seasonally_adjusted,
        goods,
    };
    let full = load_panel(input, &opts)?;
    let (panel, mut extended) = match cfg.in_sample_end {
        Some(end) => {
            let (a, b) = full.split_in_sample(end)?;
            (a, Some(b))
        }
        None => (full, None),
    };
    if let Some(p) = &cfg.extended {
        digests.push(InputDigest::of_file(p)?);
        extended = Some(load_panel(p, &opts)?);
    }
    if let Some(p) = &cfg.aux {
        digests.push(InputDigest::of_file(p)?);
    }
    Ok(Inputs {
        panel,
        extended,
        digests,
    })
}

/// Lazily computed shared state of one run.
struct Ctx<'a> {
    cfg: &'a RunConfig,
    panel: Panel,
    extended: Option<Panel>,
    gp: Option<GrowthPanel>,
    model: Option<CorrelationModel>,
    md: Option<ModeDecomposition>,
}

impl Ctx<'_> {
    fn gp(&mut self) -> Result<&GrowthPanel> {
        if self.gp.is_none() {
            self.gp = Some(to_growth(&self.panel)?);
        }
        Ok(self.gp.as_ref().expect("set"))
    }

    fn model(&mut self) -> Result<&CorrelationModel> {
        if self.model.is_none() {
            let m = correlation_matrix(self.gp()?)?;
            self.model = Some(m);
        }
        Ok(self.model.as_ref().expect("set"))
    }

    fn md(&mut self) -> Result<&ModeDecomposition> {
        if self.md.is_none() {
            self.model()?;
            let md = project_modes(self.gp.as_ref().expect("set"), self.model.as_ref().expect("set"))?;
            self.md = Some(md);
        }
        Ok(self.md.as_ref().expect("set"))
    }
}

fn delay_key(pair: VariablePair, period: f64) -> String {
    format!("{}_{}", pair.tag(), period.round())
}

/// Runs every stage and writes the complete report set.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunOutcome> {
    run_stages(cfg, &Stage::ALL)
}

/// Runs the given stages in order. Prerequisites are recomputed in memory;
/// only the requested stages write files. The summary holds one section per stage.
pub fn run_stages(cfg: &RunConfig, stages: &[Stage]) -> Result<RunOutcome> {
    cfg.validate()?;
    let inputs = load_inputs(cfg).map_err(|e| e.in_stage("ingest"))?;
    let meta = RunMeta::new(cfg.canonical_json()?, cfg.seed, inputs.digests.clone());
    let mut out = OutputDir::create(cfg.resolved_out_dir(), meta.clone())?;
    let mut ctx = Ctx {
        cfg,
        panel: inputs.panel,
        extended: inputs.extended,
        gp: None,
        model: None,
        md: None,
    };
    let mut sections = Map::new();
    for &stage in stages {
        let section = match stage {
            Stage::Ingest => stage_ingest(&mut ctx, &mut out),
            Stage::Spectrum => stage_spectrum(&mut ctx, &mut out),
            Stage::Factors => stage_factors(&mut ctx, &mut out),
            Stage::Modes => stage_modes(&mut ctx, &mut out),
            Stage::Leadlag => stage_leadlag(&mut ctx, &mut out),
            Stage::Xspec => stage_xspec(&mut ctx, &mut out),
            Stage::Oos => stage_oos(&mut ctx, &mut out, stages.len() > 1),
        }
        .map_err(|e| e.in_stage(stage.name()))?;
        sections.insert(stage.name().to_string(), section);
    }
    let mut summary = json!({
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "meta": meta,
    });
    let obj = summary.as_object_mut().expect("object");
    for (k, v) in sections {
        obj.insert(k, v);
    }
    round_json(&mut summary, SUMMARY_DIGITS);
    out.write_json("summary.json", &summary)?;
    Ok(RunOutcome {
        out_dir: out.root.clone(),
        files: out.written.clone(),
        summary,
    })
}

fn stage_ingest(ctx: &mut Ctx, out: &mut OutputDir) -> Result<Value> {
    let mut panel_bytes = out.meta.header().into_bytes();
    write_panel(&ctx.panel, &mut panel_bytes)?;
    out.write_bytes("panel.csv", &panel_bytes)?;
    let mut goods_bytes = Vec::new();
    save_goods(ctx.panel.goods(), &mut goods_bytes)?;
    out.write_bytes("goods.csv", &goods_bytes)?;

    let lags = ctx.cfg.autocorr_lags;
    let gp = ctx.gp()?;
    let mut growth = Table::new(&["date", "variable", "good", "value", "kind"]);
    for (kind, rows) in [("raw", &gp.rates_raw), ("normalized", &gp.rates_norm)] {
        for j in 0..gp.n_prime() {
            let date = gp.month(j).to_string();
            for (s, label) in gp.labels().iter().enumerate() {
                growth.push(vec![
                    date.clone(),
                    label.variable.to_string(),
                    label.good.to_string(),
                    format_sig12(rows[s][j]),
                    kind.to_string(),
                ]);
            }
        }
    }
    out.write_table("growth.csv", &growth, &["growth index dated by the later month".into()])?;

    let ac = autocorrelation(gp, lags.min(gp.n_prime() - 1))?;
    let mut t = Table::new(&["variable", "lag", "value"]);
    for v in crate::panel::Variable::ALL {
        for (m, r) in ac.averaged[v.index()].iter().enumerate() {
            t.push(vec![v.to_string(), m.to_string(), num(*r)]);
        }
    }
    out.write_table("autocorrelation.csv", &t, &[])?;

    let p = &ctx.panel;
    Ok(json!({
        "first_month": p.start_month(),
        "last_month": p.end_month(),
        "n_goods": p.n_goods(),
        "n_months": p.n_months(),
        "n_prime": p.n_months() - 1,
        "seasonally_adjusted": p.meta.seasonally_adjusted,
        "interpolated": p.meta.interpolated,
        "extended_last_month": ctx.extended.as_ref().map(|e| e.end_month()),
    }))
}

fn stage_spectrum(ctx: &mut Ctx, out: &mut OutputDir) -> Result<Value> {
    let cfg = ctx.cfg;
    let gp = ctx.gp()?;
    let n_prime = gp.n_prime();
    let sp = averaged_power_spectrum(gp)?;
    let scale = cfg.spectrum_scale;
    let scale_note = vec![format!("power scale: {scale}")];
    let mut t = Table::new(&["k", "period_months", "power"]);
    for &k in &sp.half_range {
        t.push(vec![k.to_string(), num(sp.period(k)), num(scale * sp.power[k])]);
    }
    out.write_table("spectrum.csv", &t, &scale_note)?;

    let mut chopped = Table::new(&["chop", "k", "period_months", "power"]);
    for (s, set) in chopped_spectra(&ctx.panel, &cfg.chops)? {
        for &k in &set.half_range {
            chopped.push(vec![s.to_string(), k.to_string(), num(set.period(k)), num(scale * set.power[k])]);
        }
    }
    out.write_table("spectrum_chopped.csv", &chopped, &scale_note)?;

    let gp = ctx.gp.as_ref().expect("set");
    let grid = &cfg.continuous;
    let t_max = grid.t_max.min(n_prime as f64);
    let cs = continuous_spectrum(gp, grid.t_min, t_max, grid.step)?;
    let mut ct = Table::new(&["period_months", "power"]);
    for (p, v) in cs.periods.iter().zip(&cs.values) {
        ct.push(vec![num(*p), num(scale * v)]);
    }
    out.write_table(
        "spectrum_continuous.csv",
        &ct,
        &[
            format!("grid: {} to {} step {}", grid.t_min, t_max, grid.step),
            scale_note[0].clone(),
        ],
    )?;
    let peaks = find_peaks(&cs, n_prime, cfg.peak_prominence, cfg.min_cycles);
    Ok(json!({
        "n_prime": n_prime,
        "total_power": sp.total_power(),
        "peaks": peaks,
        "chops": cfg.chops,
    }))
}

fn significance_tables(rep: &SignificanceReport, model: &CorrelationModel, out: &mut OutputDir) -> Result<()> {
    let mut t = Table::new(&["mode", "eigenvalue", "significant", "margin"]);
    for m in &rep.modes {
        t.push(vec![m.mode.to_string(), num(m.eigenvalue), m.significant.to_string(), num(m.margin)]);
    }
    let p = &rep.params;
    out.write_table(
        "eigen.csv",
        &t,
        &[format!(
            "Q={} lambda_plus={} lambda_minus={}",
            p.q, p.lambda_plus, p.lambda_minus
        )],
    )?;
    let mut v = Table::new(&["mode", "variable", "good", "component"]);
    for (n, vec) in model.eig.vectors.iter().enumerate() {
        for (label, c) in model.labels.iter().zip(vec) {
            v.push(vec![(n + 1).to_string(), label.variable.to_string(), label.good.to_string(), num(*c)]);
        }
    }
    out.write_table("eigenvectors.csv", &v, &["sign: production-block mean positive".into()])?;
    let mut d = Table::new(&["lambda", "density"]);
    for (l, r) in &rep.density_curve {
        d.push(vec![num(*l), num(*r)]);
    }
    out.write_table("mp_density.csv", &d, &[])?;
    if let Some(null) = &rep.null_distribution {
        let mut h = Table::new(&["lambda_bin", "density"]);
        for (c, r) in &null.eigenvalue_pdf {
            h.push(vec![num(*c), num(*r)]);
        }
        out.write_table(
            "null_pdf.csv",
            &h,
            &[format!("rotation trials={} bin_width={}", null.trials, null.bin_width)],
        )?;
    }
    Ok(())
}

fn stage_factors(ctx: &mut Ctx, out: &mut OutputDir) -> Result<Value> {
    let cfg = ctx.cfg;
    ctx.model()?;
    let gp = ctx.gp.as_ref().expect("set");
    let model = ctx.model.as_ref().expect("set");
    let rep = if cfg.null_trials > 0 {
        let opts = RotationNullOptions {
            trials: cfg.null_trials,
            bin_width: cfg.null_bin_width,
            shift: ShiftPolicy::Uniform,
        };
        rotation_null(gp, &opts, RngStream::new(cfg.seed, ROTATION_STREAM))?
    } else {
        classify_significance(model, &model.rmt_params())
    };
    significance_tables(&rep, model, out)?;
    let m = model.m() as f64;
    let top: Vec<f64> = model.eig.values.iter().take(5).copied().collect();
    Ok(json!({
        "m": model.m(),
        "q": rep.params.q,
        "lambda_plus": rep.params.lambda_plus,
        "lambda_minus": rep.params.lambda_minus,
        "eigenvalues_top": top,
        "relative_top": top.iter().map(|l| l / m).collect::<Vec<_>>(),
        "significant_modes": rep.significant_modes,
        "block_means": (0..2.min(model.m())).map(|n| {
            crate::panel::Variable::ALL.map(|v| model.block_mean(n, v))
        }).collect::<Vec<_>>(),
        "rotation_null": rep.null_distribution.as_ref().map(|n| json!({
            "trials": n.trials,
            "largest": n.largest,
            "second": n.second,
            "largest_p999": n.largest_p999,
        })),
    }))
}

fn stage_modes(ctx: &mut Ctx, out: &mut OutputDir) -> Result<Value> {
    let cfg = ctx.cfg;
    let md = ctx.md()?;
    let mut coeffs = Table::new(&["mode", "t", "value"]);
    let mut spec = Table::new(&["mode", "k", "period_months", "power"]);
    for n in 0..md.m() {
        for (j, a) in md.coefficients[n].iter().enumerate() {
            coeffs.push(vec![(n + 1).to_string(), (j + 1).to_string(), num(*a)]);
        }
        for k in 1..=md.n_prime / 2 {
            spec.push(vec![
                (n + 1).to_string(),
                k.to_string(),
                num(md.n_prime as f64 / k as f64),
                num(md.mode_power[n][k]),
            ]);
        }
    }
    out.write_table("mode_coefficients.csv", &coeffs, &[])?;
    out.write_table("mode_spectrum.csv", &spec, &[])?;

    let (bins, bins_note) = match &cfg.bins {
        Some(e) => (PeriodBins::new(e.clone())?, "bins: configured".to_string()),
        None => (
            PeriodBins::default_for(md.n_prime),
            "bins: one per wavenumber for k<=12, then period ratio 1.25".to_string(),
        ),
    };
    let contrib = binned_relative_contribution(md, &bins, &cfg.modes)?;
    let mut header = vec!["period_low", "period_high", "n_wavenumbers"];
    let mode_cols: Vec<String> = cfg.modes.iter().map(|n| format!("mode{n}")).collect();
    header.extend(mode_cols.iter().map(|s| s.as_str()));
    header.push("combined");
    let mut ct = Table::new(&header);
    for b in &contrib {
        let mut row = vec![num(b.period_low), num(b.period_high), b.wavenumbers.len().to_string()];
        match &b.per_mode {
            Some(v) => row.extend(v.iter().map(|x| num(*x))),
            None => row.extend(cfg.modes.iter().map(|_| String::new())),
        }
        row.push(opt_num(b.combined));
        ct.push(row);
    }
    out.write_table("mode_contributions.csv", &ct, &[bins_note])?;

    let cr = reconstruct_cycles(md, &cfg.modes, &cfg.wavenumbers)?;
    write_cycles(out, "cycles.csv", &cr)?;
    for &k in &cr.wavenumbers {
        let single = reconstruct_cycles(md, &cfg.modes, &[k])?;
        write_cycles(out, &format!("cycles_k{k}.csv"), &single)?;
    }
    let m = md.m() as f64;
    let shares: Vec<f64> = cfg.modes.iter().map(|&n| md.eigenvalues[n - 1] / m).collect();
    Ok(json!({
        "modes": cfg.modes,
        "wavenumbers": cr.wavenumbers,
        "relative_contribution": shares,
        "combined_contribution": shares.iter().sum::<f64>(),
        "bins": contrib,
        "amplitudes": cr.amplitudes,
    }))
}

fn write_cycles(out: &mut OutputDir, name: &str, cr: &crate::modes::CycleReconstruction) -> Result<()> {
    let mut t = Table::new(&["variable", "t", "value", "component"]);
    for vc in &cr.averaged {
        for (i, &n) in cr.modes.iter().enumerate() {
            for (j, x) in vc.per_mode[i].iter().enumerate() {
                t.push(vec![vc.variable.to_string(), (j + 1).to_string(), num(*x), format!("mode{n}")]);
            }
        }
        for (j, x) in vc.sum.iter().enumerate() {
            t.push(vec![vc.variable.to_string(), (j + 1).to_string(), num(*x), "sum".into()]);
        }
    }
    out.write_table(
        name,
        &t,
        &[format!("goods-averaged; wavenumbers {:?}", cr.wavenumbers)],
    )
    .map(|_| ())
}

fn lag_values(cr: &crate::modes::CycleReconstruction, ks: &[usize]) -> Result<Map<String, Value>> {
    let mut m = Map::new();
    for pair in [VariablePair::SP, VariablePair::PI] {
        for &k in ks {
            let est = phase_delay(cr, pair, k)?;
            m.insert(delay_key(pair, est.period), json!(est.delta_months));
        }
    }
    Ok(m)
}

fn stage_leadlag(ctx: &mut Ctx, out: &mut OutputDir) -> Result<Value> {
    let cfg = ctx.cfg;
    let md = ctx.md()?;
    let cr = reconstruct_cycles(md, &cfg.modes, &cfg.wavenumbers)?;
    let all: Vec<usize> = (1..=md.m()).collect();
    let cr_all = reconstruct_cycles(md, &all, &cfg.wavenumbers)?;
    let observed = lag_values(&cr, &cr.wavenumbers)?;
    let all_mode = lag_values(&cr_all, &cr.wavenumbers)?;

    let mc: Option<MonteCarloLagSummary> = if cfg.trials > 0 {
        let opts = ReshuffleOptions {
            trials: cfg.trials,
            modes: cfg.modes.clone(),
            targets: default_targets(&cr.wavenumbers),
            permutation: PermutationPolicy::Uniform,
            min_overlap: cfg.min_overlap,
            ci_level: 0.95,
            keep_samples: cfg.write_null_samples,
        };
        let gp = ctx.gp.as_ref().expect("set");
        let model = ctx.model.as_ref().expect("set");
        Some(reshuffle_significance(gp, model, &opts, RngStream::new(cfg.seed, RESHUFFLE_STREAM))?)
    } else {
        None
    };

    if let Some(mc) = &mc {
        if cfg.write_null_samples {
            let mut t = Table::new(&["trial", "quantity", "eigenvectors", "value"]);
            for q in &mc.quantities {
                let key = delay_key(q.pair, q.period);
                for (path, samples) in [("reestimated", &q.samples_reestimated), ("frozen", &q.samples_frozen)] {
                    for (i, x) in samples.iter().flatten().enumerate() {
                        t.push(vec![(i + 1).to_string(), key.clone(), path.into(), num(*x)]);
                    }
                }
            }
            out.write_table("leadlag_null_samples.csv", &t, &["accepted trials only".into()])?;
        }
    }

    let mc_summary = mc.as_ref().map(|mc| {
        let per: Map<String, Value> = mc
            .quantities
            .iter()
            .map(|q| {
                let headline = if cfg.freeze_eigenvectors { &q.frozen } else { &q.reestimated };
                (
                    delay_key(q.pair, q.period),
                    json!({
                        "observed": q.observed,
                        "null": headline,
                        "reestimated": q.reestimated,
                        "frozen": q.frozen,
                        "observed_inside_ci": headline.ci_low <= q.observed && q.observed <= headline.ci_high,
                    }),
                )
            })
            .collect();
        json!({
            "seed": mc.rng.seed,
            "stream": mc.rng.stream_id,
            "trials_requested": mc.trials_requested,
            "trials_used": mc.trials_used,
            "trials_rejected": mc.trials_rejected,
            "acceptance_rate": mc.acceptance_rate,
            "headline_eigenvectors": if cfg.freeze_eigenvectors { "frozen" } else { "reestimated" },
            "quantities": per,
        })
    });

    let report = json!({
        "modes": cfg.modes,
        "wavenumbers": cr.wavenumbers,
        "observed": observed,
        "all_modes": all_mode,
        "monte_carlo": mc_summary,
    });
    let mut full = report.clone();
    if let (Some(mc), Some(obj)) = (&mc, full.as_object_mut()) {
        obj.insert("monte_carlo_detail".into(), serde_json::to_value(mc)?);
    }
    out.write_json(
        "leadlag.json",
        &json!({ "meta": out.meta.clone(), "report": full }),
    )?;
    Ok(report)
}

fn xspec_table(est: &crate::xspec::CrossSpectrumEstimate) -> Table {
    let mut t = Table::new(&[
        "k",
        "period_months",
        "kappa2",
        "phase_cycles",
        "phase_ci_low",
        "phase_ci_high",
        "significant_90",
        "significant_99",
    ]);
    for k in 1..=est.len / 2 {
        let (lo, hi) = est.phase_ci[k].map_or((None, None), |(a, b)| (Some(a), Some(b)));
        t.push(vec![
            k.to_string(),
            num(est.period(k)),
            num(est.kappa2[k]),
            num(est.phase[k]),
            opt_num(lo),
            opt_num(hi),
            est.significant_90(k).to_string(),
            est.significant_99(k).to_string(),
        ]);
    }
    t
}

fn stage_xspec(ctx: &mut Ctx, out: &mut OutputDir) -> Result<Value> {
    let cfg = ctx.cfg;
    let md = ctx.md()?;
    let all: Vec<usize> = (1..=md.m()).collect();
    let variants = [
        ("two_mode", averaged_mode_series(md, &cfg.modes)?),
        ("all_modes", averaged_mode_series(md, &all)?),
    ];
    let mut section = Map::new();
    let mut common = None;
    for (name, series) in &variants {
        let mut per = Map::new();
        for (pair, shift) in [(VariablePair::SP, cfg.shift_sp), (VariablePair::PI, cfg.shift_pi)] {
            let x = &series[pair.leader.index()];
            let y = &series[pair.follower.index()];
            let est = coherency_phase(x, y, cfg.span, shift, cfg.smoothing)?;
            let notes = [
                format!("x={} y={} (positive phase: y lags x)", pair.leader, pair.follower),
                format!(
                    "modified Daniell span {} ({:?} edges), bandwidth {} cycles/month, eq_dof {}",
                    est.span, est.edge, est.bandwidth, est.eq_dof
                ),
                format!(
                    "null coherency c = 1 - (1-level)^(1/(m-1)), m = eq_dof/2: 90% {} 99% {}",
                    est.level_90, est.level_99
                ),
                "phase 95% CI: phase +- 1.96 sqrt((1/eq_dof)(1/kappa2 - 1))/(2 pi), where kappa2 passes 90%".into(),
                format!("alignment shift {} months", est.alignment_shift),
            ];
            out.write_table(&format!("xspec_{name}_{}.csv", pair.tag()), &xspec_table(&est), &notes)?;
            for &k in &cfg.wavenumbers {
                let d = delay_in_months(&est, k)?;
                per.insert(
                    delay_key(pair, est.period(k)),
                    json!({ "k": k, "kappa2": est.kappa2[k], "delay": d }),
                );
            }
            common.get_or_insert_with(|| {
                json!({
                    "span": est.span,
                    "bandwidth": est.bandwidth,
                    "eq_dof": est.eq_dof,
                    "level_90": est.level_90,
                    "level_99": est.level_99,
                })
            });
        }
        section.insert((*name).to_string(), Value::Object(per));
    }
    section.insert("kernel".into(), common.unwrap_or(Value::Null));
    Ok(Value::Object(section))
}

fn stage_oos(ctx: &mut Ctx, out: &mut OutputDir, optional: bool) -> Result<Value> {
    let cfg = ctx.cfg;
    let Some(extended) = ctx.extended.clone() else {
        if optional {
            return Ok(json!({ "skipped": "no extended panel or in-sample end month configured" }));
        }
        return Err(Error::Config(
            "out-of-sample stage needs `extended` or `in_sample_end`".into(),
        ));
    };
    ctx.model()?;
    let gp = ctx.gp.as_ref().expect("set");
    let model = ctx.model.as_ref().expect("set");
    let rep = project_out_of_sample(&extended, model, gp, &cfg.modes, cfg.normalization)?;

    let mut header = vec!["t".to_string(), "date".into(), "P".into()];
    header.extend(cfg.modes.iter().map(|n| format!("partial_mode{n}")));
    header.extend(cfg.modes.iter().map(|n| format!("pi_mode{n}")));
    let hdr: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut t = Table::new(&hdr);
    for (j, month) in rep.months.iter().enumerate() {
        let mut row = vec![(j + 1).to_string(), month.to_string(), num(rep.total[j])];
        row.extend(rep.partial.iter().map(|p| num(p[j])));
        row.extend(rep.relative.iter().map(|r| opt_num(r[j])));
        t.push(row);
    }
    let boundary = rep.months.get(rep.in_sample_boundary).copied();
    out.write_table(
        "volatility.csv",
        &t,
        &[
            format!("normalization: {:?}", rep.normalization).to_lowercase(),
            format!(
                "first out-of-sample month: {}",
                boundary.map(|m| m.to_string()).unwrap_or_else(|| "none".into())
            ),
        ],
    )?;

    let mut overlay_rows = None;
    if let Some(p) = &cfg.aux {
        let aux = load_aux_series(p)?;
        let rows = auxiliary_overlay(&rep, &aux)?;
        let mut header = vec!["date".to_string(), aux.label.clone(), "P".into()];
        header.extend(cfg.modes.iter().map(|n| format!("pi_mode{n}")));
        let hdr: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
        let mut ot = Table::new(&hdr);
        for r in &rows {
            let mut row = vec![r.month.to_string(), num(r.aux), num(r.total)];
            row.extend(r.relative.iter().map(|x| opt_num(*x)));
            ot.push(row);
        }
        out.write_table("overlay.csv", &ot, &[])?;
        overlay_rows = Some(rows.len());
    }

    let mean_of = |xs: &[Option<f64>]| {
        let v: Vec<f64> = xs.iter().flatten().copied().collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let b = rep.in_sample_boundary;
    let peak = rep
        .total
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(j, p)| json!({ "month": rep.months[j], "P": p }));
    Ok(json!({
        "normalization": rep.normalization,
        "first_out_of_sample_month": boundary,
        "months": rep.months.len(),
        "mean_relative_in_sample": rep.relative.iter().map(|r| mean_of(&r[..b])).collect::<Vec<_>>(),
        "mean_relative_out_of_sample": rep.relative.iter().map(|r| mean_of(&r[b..])).collect::<Vec<_>>(),
        "peak_volatility": peak,
        "overlay_rows": overlay_rows,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_toml() {
        let mut c = RunConfig {
            input: Some("panel.csv".into()),
            in_sample_end: Some(YearMonth::new(2007, 12).unwrap()),
            bins: Some(vec![1.5, 10.0, 300.0]),
            ..Default::default()
        };
        c.min_overlap = Some(0.8);
        let text = c.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
        assert!(RunConfig::from_toml_str("bogus = 1").is_err());
        let partial = RunConfig::from_toml_str("seed = 5\nsmoothing = \"truncate\"").unwrap();
        assert_eq!(partial.seed, 5);
        assert_eq!(partial.smoothing, EdgeMode::Truncate);
        assert_eq!(partial.span, 11);
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = RunConfig {
            out_dir: Some("x".into()),
            ..Default::default()
        };
        let b = RunConfig {
            out_dir: Some("y".into()),
            ..Default::default()
        };
        assert_eq!(a.canonical_json().unwrap(), b.canonical_json().unwrap());
    }
}
