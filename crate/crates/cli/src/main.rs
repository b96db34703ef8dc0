use std::path::PathBuf;
use std::process::ExitCode;

use bcycle::oos::NormalizationPolicy;
use bcycle::panel::YearMonth;
use bcycle::xspec::EdgeMode;
use bcycle::{run_stages, Error, ErrorKind, RunConfig, Stage};
use clap::{Args, Parser, Subcommand};

/// Business-cycle analysis of a monthly production/shipment/inventory panel.
#[derive(Parser, Debug)]
#[command(name = "bcycle", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate the panel and write growth rates and autocorrelations.
    Ingest(RunArgs),
    /// Averaged, chopped, and continuous power spectra.
    Spectrum(RunArgs),
    /// Correlation eigenvalues against the random-matrix bounds.
    Factors(RunArgs),
    /// Mode spectra, binned contributions, and cycle reconstructions.
    Modes(RunArgs),
    /// Phase delays with the reshuffle null.
    Leadlag(RunArgs),
    /// Coherency and phase of the reconstructed series.
    Xspec(RunArgs),
    /// Out-of-sample volatility decomposition.
    Oos(RunArgs),
    /// Every stage.
    All(RunArgs),
}

fn parse_month(s: &str) -> Result<YearMonth, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_edge(s: &str) -> Result<EdgeMode, String> {
    match s {
        "circular" => Ok(EdgeMode::Circular),
        "truncate" => Ok(EdgeMode::Truncate),
        _ => Err(format!("expected 'circular' or 'truncate', got '{s}'")),
    }
}

fn parse_normalization(s: &str) -> Result<NormalizationPolicy, String> {
    match s {
        "frozen" => Ok(NormalizationPolicy::Frozen),
        "extended" => Ok(NormalizationPolicy::Extended),
        _ => Err(format!("expected 'frozen' or 'extended', got '{s}'")),
    }
}

/// Flags override the config file, which overrides the defaults.
#[derive(Args, Debug, Default)]
struct RunArgs {
    /// TOML file with any subset of the options below.
    #[arg(long, short = 'c')]
    config: Option<PathBuf>,
    /// Long-format panel CSV: date,variable,good,value.
    #[arg(long, short = 'i')]
    input: Option<PathBuf>,
    /// Goods table CSV: id,label,category.
    #[arg(long)]
    goods: Option<PathBuf>,
    /// Panel reaching past the in-sample window.
    #[arg(long)]
    extended: Option<PathBuf>,
    /// Last in-sample month (YYYY-MM); later input months become the extension.
    #[arg(long, value_parser = parse_month)]
    in_sample_end: Option<YearMonth>,
    /// date,value series joined to the volatility report.
    #[arg(long)]
    aux: Option<PathBuf>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    interpolate_gaps: Option<bool>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    seasonally_adjusted: Option<bool>,
    #[arg(long)]
    seed: Option<u64>,
    /// Reshuffle trials for the delay null; 0 skips it.
    #[arg(long)]
    trials: Option<usize>,
    /// Rotation trials for the eigenvalue null; 0 skips it.
    #[arg(long)]
    null_trials: Option<usize>,
    #[arg(long)]
    null_bin_width: Option<f64>,
    /// Comma-separated sample lengths for the chopped spectra.
    #[arg(long, value_delimiter = ',')]
    chops: Option<Vec<usize>>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_step: Option<f64>,
    #[arg(long)]
    spectrum_scale: Option<f64>,
    #[arg(long)]
    peak_prominence: Option<f64>,
    #[arg(long)]
    min_cycles: Option<f64>,
    #[arg(long)]
    autocorr_lags: Option<usize>,
    /// Comma-separated 1-based mode indices.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<usize>>,
    /// Comma-separated Fourier wavenumbers.
    #[arg(long, value_delimiter = ',')]
    wavenumbers: Option<Vec<usize>>,
    /// Comma-separated period-bin edges in months.
    #[arg(long, value_delimiter = ',')]
    bins: Option<Vec<f64>>,
    /// Modified Daniell kernel span.
    #[arg(long)]
    span: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    shift_sp: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    shift_pi: Option<i64>,
    /// circular or truncate.
    #[arg(long, value_parser = parse_edge)]
    smoothing: Option<EdgeMode>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    freeze_eigenvectors: Option<bool>,
    #[arg(long)]
    min_overlap: Option<f64>,
    /// frozen or extended.
    #[arg(long, value_parser = parse_normalization)]
    normalization: Option<NormalizationPolicy>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    write_null_samples: Option<bool>,
    /// Output directory; defaults to $BCYCLE_OUT_DIR, then ./bcycle-out.
    #[arg(long, short = 'o')]
    out_dir: Option<PathBuf>,
}

macro_rules! apply {
    ($cfg:ident, $args:ident, $($field:ident),*) => {
        $(if let Some(v) = $args.$field { $cfg.$field = v; })*
    };
}

impl RunArgs {
    fn into_config(self) -> bcycle::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let a = self;
        for (dst, src) in [
            (&mut cfg.input, a.input),
            (&mut cfg.goods, a.goods),
            (&mut cfg.extended, a.extended),
            (&mut cfg.aux, a.aux),
            (&mut cfg.out_dir, a.out_dir),
        ] {
            if src.is_some() {
                *dst = src;
            }
        }
        if a.in_sample_end.is_some() {
            cfg.in_sample_end = a.in_sample_end;
        }
        if a.bins.is_some() {
            cfg.bins = a.bins;
        }
        if a.min_overlap.is_some() {
            cfg.min_overlap = a.min_overlap;
        }
        if let Some(v) = a.t_min {
            cfg.continuous.t_min = v;
        }
        if let Some(v) = a.t_max {
            cfg.continuous.t_max = v;
        }
        if let Some(v) = a.t_step {
            cfg.continuous.step = v;
        }
        apply!(
            cfg, a, interpolate_gaps, seasonally_adjusted, seed, trials, null_trials,
            null_bin_width, chops, spectrum_scale, peak_prominence, min_cycles, autocorr_lags,
            modes, wavenumbers, span, shift_sp, shift_pi, smoothing, freeze_eigenvectors,
            normalization, write_null_samples
        );
        Ok(cfg)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Input => 2,
        ErrorKind::Numerical => 3,
        ErrorKind::Simulation => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stages, args): (Vec<Stage>, RunArgs) = match cli.command {
        Command::Ingest(a) => (vec![Stage::Ingest], a),
        Command::Spectrum(a) => (vec![Stage::Spectrum], a),
        Command::Factors(a) => (vec![Stage::Factors], a),
        Command::Modes(a) => (vec![Stage::Modes], a),
        Command::Leadlag(a) => (vec![Stage::Leadlag], a),
        Command::Xspec(a) => (vec![Stage::Xspec], a),
        Command::Oos(a) => (vec![Stage::Oos], a),
        Command::All(a) => (Stage::ALL.to_vec(), a),
    };
    let result = args.into_config().and_then(|cfg| run_stages(&cfg, &stages));
    match result {
        Ok(outcome) => {
            println!(
                "wrote {} files to {}",
                outcome.files.len(),
                outcome.out_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
