//! Batch front end for the Gabor/almost-periodic toolkit.
//!
//! Every command resolves an [`ExperimentConfig`] (flags override an
//! optional JSON config file whose keys are the flag names), runs one
//! computation from the core crate and emits a JSON report, plus a CSV
//! table for the sweep commands. Identical config and seed produce
//! byte-identical reports apart from the `timestamp` field. Random inputs
//! come from the ChaCha8 stream cipher generator seeded with the config
//! seed, so they are reproducible across platforms.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use apgabor_core::ap::{APSequence, TrigPolynomial};
use apgabor_core::frames::{
    fiber_eig_sweep, finite_modulation_failure, frame_sandwich_check, subspace_frame_bounds,
    FrameBounds, SpectrumSet,
};
use apgabor_core::gabor::{
    analysis_family, periodization_oracle, synthesis, AnalysisFamilyRecord, GaborSystem,
};
use apgabor_core::windows::{parse_window_spec, periodized_spectral_sum, wiener_norm};
use apgabor_core::{frames, Error as CoreError};

/// Command-line interface.
#[derive(Parser, Debug)]
#[command(
    name = "apgabor",
    version,
    about = "Gabor analysis on almost periodic functions: certified bounds and reports"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandKind,
}

#[derive(Subcommand, Debug)]
pub enum CommandKind {
    /// Sweep the periodized spectral sum over one residue period.
    Bessel(RawOptions),
    /// Eigenvalue frame bounds from the fiber-matrix sweep.
    FrameBounds(RawOptions),
    /// Analysis family of a polynomial read from --input.
    Analyze(RawOptions),
    /// Synthesis of a sequence read from --input.
    Synthesize(RawOptions),
    /// Two-sided energy check on seeded random polynomials.
    Sandwich(RawOptions),
    /// Subspace frame bounds on a finite spectrum set.
    Subspace(RawOptions),
    /// Periodization oracle vs the closed-form synthesis coefficient.
    OracleCheck(RawOptions),
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Bessel(_) => "bessel",
            CommandKind::FrameBounds(_) => "frame-bounds",
            CommandKind::Analyze(_) => "analyze",
            CommandKind::Synthesize(_) => "synthesize",
            CommandKind::Sandwich(_) => "sandwich",
            CommandKind::Subspace(_) => "subspace",
            CommandKind::OracleCheck(_) => "oracle-check",
        }
    }

    pub fn options(&self) -> &RawOptions {
        match self {
            CommandKind::Bessel(o)
            | CommandKind::FrameBounds(o)
            | CommandKind::Analyze(o)
            | CommandKind::Synthesize(o)
            | CommandKind::Sandwich(o)
            | CommandKind::Subspace(o)
            | CommandKind::OracleCheck(o) => o,
        }
    }
}

/// Unresolved options: every field optional so a config file can fill the
/// gaps. File keys equal the long flag names.
#[derive(Args, Debug, Default, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawOptions {
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Window spec: gaussian:sigma=1.0 | triangle | rect:a=0,b=1
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Residue grid points for sweeps.
    #[arg(long)]
    pub grid: Option<u32>,
    /// Lattice truncation |k| <= K.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub trunc_k: Option<u32>,
    /// Modulation truncation |l| <= L (defaults to an auto-certified value).
    #[arg(long = "L")]
    #[serde(rename = "L")]
    pub ell_trunc: Option<u32>,
    /// Frequency-lattice truncation |p| <= P.
    #[arg(long = "P")]
    #[serde(rename = "P")]
    pub p_trunc: Option<u32>,
    #[arg(long)]
    pub trials: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Terms per random polynomial.
    #[arg(long)]
    pub terms: Option<u32>,
    #[arg(long = "freq-min", allow_hyphen_values = true)]
    #[serde(rename = "freq-min")]
    pub freq_min: Option<f64>,
    #[arg(long = "freq-max", allow_hyphen_values = true)]
    #[serde(rename = "freq-max")]
    pub freq_max: Option<f64>,
    #[arg(long = "min-gap")]
    #[serde(rename = "min-gap")]
    pub min_gap: Option<f64>,
    /// Certified tail tolerance for analysis families.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Averaging half-length for the periodization oracle.
    #[arg(long = "T")]
    #[serde(rename = "T")]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Oracle frequency.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Oracle sequence phase.
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<f64>,
    /// Comma-separated spectrum points for `subspace`.
    #[arg(long = "spectrum", allow_hyphen_values = true)]
    pub spectrum: Option<String>,
    /// Comma-separated modulation indices for the finite-F demonstration.
    #[arg(long = "finite-ell", allow_hyphen_values = true)]
    #[serde(rename = "finite-ell")]
    pub finite_ell: Option<String>,
    /// Relative error threshold for oracle-check.
    #[arg(long = "rel-tol")]
    #[serde(rename = "rel-tol")]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long = "out-json")]
    #[serde(rename = "out-json")]
    pub out_json: Option<PathBuf>,
    #[arg(long = "out-csv")]
    #[serde(rename = "out-csv")]
    pub out_csv: Option<PathBuf>,
}

impl RawOptions {
    fn or(self, fallback: RawOptions) -> RawOptions {
        RawOptions {
            config: self.config.or(fallback.config),
            window: self.window.or(fallback.window),
            alpha: self.alpha.or(fallback.alpha),
            beta: self.beta.or(fallback.beta),
            grid: self.grid.or(fallback.grid),
            trunc_k: self.trunc_k.or(fallback.trunc_k),
            ell_trunc: self.ell_trunc.or(fallback.ell_trunc),
            p_trunc: self.p_trunc.or(fallback.p_trunc),
            trials: self.trials.or(fallback.trials),
            seed: self.seed.or(fallback.seed),
            terms: self.terms.or(fallback.terms),
            freq_min: self.freq_min.or(fallback.freq_min),
            freq_max: self.freq_max.or(fallback.freq_max),
            min_gap: self.min_gap.or(fallback.min_gap),
            tol: self.tol.or(fallback.tol),
            t_max: self.t_max.or(fallback.t_max),
            dt: self.dt.or(fallback.dt),
            mu: self.mu.or(fallback.mu),
            phase: self.phase.or(fallback.phase),
            spectrum: self.spectrum.or(fallback.spectrum),
            finite_ell: self.finite_ell.or(fallback.finite_ell),
            rel_tol: self.rel_tol.or(fallback.rel_tol),
            input: self.input.or(fallback.input),
            out_json: self.out_json.or(fallback.out_json),
            out_csv: self.out_csv.or(fallback.out_csv),
        }
    }
}

/// Fully resolved configuration, echoed verbatim into every report.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub window: String,
    pub alpha: f64,
    pub beta: f64,
    pub grid: u32,
    pub trunc_k: u32,
    /// None means auto-certified per window.
    pub ell_trunc: Option<u32>,
    pub p_trunc: u32,
    pub trials: u32,
    pub seed: u64,
    pub terms: u32,
    pub freq_min: f64,
    pub freq_max: f64,
    pub min_gap: f64,
    pub tol: f64,
    pub t_max: f64,
    pub dt: f64,
    pub mu: f64,
    pub phase: f64,
    pub spectrum: Option<Vec<f64>>,
    pub finite_ell: Option<Vec<i64>>,
    pub rel_tol: f64,
    pub input: Option<String>,
}

/// Errors split by the exit code they must produce.
#[derive(Debug)]
pub enum RunError {
    /// Bad flags, window spec, config or input files: exit 1.
    Usage(String),
    /// Invariant violations detected inside a computation: exit 2.
    Invariant(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Usage(m) => write!(f, "{m}"),
            RunError::Invariant(m) => write!(f, "{m}"),
        }
    }
}

fn core_err(e: CoreError) -> RunError {
    match e {
        CoreError::InvariantViolation(_) => RunError::Invariant(e.to_string()),
        _ => RunError::Usage(e.to_string()),
    }
}

fn usage(msg: impl Into<String>) -> RunError {
    RunError::Usage(msg.into())
}

fn parse_list<T: std::str::FromStr>(raw: &str, what: &str) -> Result<Vec<T>, RunError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| usage(format!("cannot parse {what} entry '{s}'")))
        })
        .collect()
}

/// Merges flags with the config file and applies per-command defaults.
pub fn resolve_config(command: &CommandKind) -> Result<ExperimentConfig, RunError> {
    let mut opts = command.options().clone();
    if let Some(path) = opts.config.clone() {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
        let from_file: RawOptions = serde_json::from_str(&text)
            .map_err(|e| usage(format!("malformed config file {}: {e}", path.display())))?;
        opts = opts.or(from_file);
    }
    let name = command.name();
    let window = opts
        .window
        .ok_or_else(|| usage("missing --window (or a 'window' config entry)"))?;
    let t_max = opts.t_max.unwrap_or(200.0);
    let alpha = opts.alpha.unwrap_or(1.0);
    // The oracle needs the translate truncation to clear the averaging
    // interval; everything else defaults to K = 10.
    let default_k = if name == "oracle-check" {
        ((t_max + 16.0) / alpha).ceil() as u32
    } else {
        10
    };
    let spectrum = match &opts.spectrum {
        Some(raw) => Some(parse_list::<f64>(raw, "spectrum")?),
        None => None,
    };
    let finite_ell = match &opts.finite_ell {
        Some(raw) => Some(parse_list::<i64>(raw, "finite-ell")?),
        None => None,
    };
    let cfg = ExperimentConfig {
        command: name.to_string(),
        window,
        alpha,
        beta: opts.beta.unwrap_or(1.0),
        grid: opts.grid.unwrap_or(256),
        trunc_k: opts.trunc_k.unwrap_or(default_k),
        ell_trunc: opts.ell_trunc,
        p_trunc: opts.p_trunc.unwrap_or(10),
        trials: opts.trials.unwrap_or(100),
        seed: opts.seed.unwrap_or(42),
        terms: opts.terms.unwrap_or(6),
        freq_min: opts.freq_min.unwrap_or(-5.0),
        freq_max: opts.freq_max.unwrap_or(5.0),
        min_gap: opts.min_gap.unwrap_or(0.1),
        tol: opts.tol.unwrap_or(1e-3),
        t_max,
        dt: opts.dt.unwrap_or(1e-3),
        mu: opts.mu.unwrap_or(0.5),
        phase: opts.phase.unwrap_or(0.5),
        spectrum,
        finite_ell,
        rel_tol: opts.rel_tol.unwrap_or(1e-2),
        input: opts.input.as_ref().map(|p| p.display().to_string()),
    };
    if cfg.alpha <= 0.0 || cfg.beta <= 0.0 {
        return Err(usage("alpha and beta must be positive"));
    }
    if cfg.grid < 1 || cfg.p_trunc < 1 || cfg.trunc_k < 1 || cfg.ell_trunc == Some(0) {
        return Err(usage("grid and the truncations K, L, P must be at least 1"));
    }
    Ok(cfg)
}

/// One failed inequality, with the three numbers that witnessed it.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub inequality: String,
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub detail: String,
}

/// Everything a command produces before it is written out.
pub struct RunOutput {
    pub report: Value,
    pub csv: Option<String>,
    pub violations: usize,
}

/// Deterministic random polynomial: frequencies are drawn uniformly from
/// `[freq_min, freq_max]` by rejection until all pairwise gaps reach
/// `min_gap`; coefficient moduli are uniform in `[0.1, 2]` with uniform
/// argument. The generator is ChaCha8 seeded with `seed`, so identical
/// seeds give bit-identical polynomials on every platform.
pub fn generate_random_polynomial(
    seed: u64,
    n_terms: u32,
    freq_range: (f64, f64),
    min_gap: f64,
) -> Result<TrigPolynomial, CoreError> {
    let (lo, hi) = freq_range;
    if n_terms < 1 {
        return Err(CoreError::InvalidArgument("need at least one term".into()));
    }
    if !(min_gap.is_finite() && min_gap > 0.0) || !(lo.is_finite() && hi > lo) {
        return Err(CoreError::InvalidArgument(
            "need min_gap > 0 and freq_max > freq_min".into(),
        ));
    }
    if (n_terms as f64 - 1.0) * min_gap > hi - lo {
        return Err(CoreError::InvalidArgument(format!(
            "{n_terms} frequencies with gap {min_gap} cannot fit in [{lo}, {hi}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut freqs: Vec<f64> = Vec::with_capacity(n_terms as usize);
    let mut attempts = 0u64;
    while freqs.len() < n_terms as usize {
        attempts += 1;
        if attempts > 200_000 * n_terms as u64 {
            return Err(CoreError::InvalidArgument(
                "rejection sampling stalled; gap too tight for the range".into(),
            ));
        }
        let f = rng.random_range(lo..=hi);
        if freqs.iter().all(|&g| (g - f).abs() >= min_gap) {
            freqs.push(f);
        }
    }
    let terms: Vec<(f64, Complex64)> = freqs
        .into_iter()
        .map(|f| {
            let modulus = rng.random_range(0.1..=2.0);
            let arg = rng.random_range(0.0..TAU);
            (f, Complex64::from_polar(modulus, arg))
        })
        .collect();
    Ok(TrigPolynomial::new(terms))
}

/// Deterministic random sequence with circular phase gaps of at least
/// `min_gap`; same generator and coefficient law as the polynomials.
pub fn generate_random_sequence(
    seed: u64,
    n_terms: u32,
    min_gap: f64,
) -> Result<APSequence, CoreError> {
    if n_terms < 1 {
        return Err(CoreError::InvalidArgument("need at least one term".into()));
    }
    if !(min_gap.is_finite() && min_gap > 0.0) || n_terms as f64 * min_gap > TAU {
        return Err(CoreError::InvalidArgument(
            "phase gaps do not fit on the circle".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phases: Vec<f64> = Vec::with_capacity(n_terms as usize);
    let mut attempts = 0u64;
    while phases.len() < n_terms as usize {
        attempts += 1;
        if attempts > 200_000 * n_terms as u64 {
            return Err(CoreError::InvalidArgument(
                "rejection sampling stalled; gap too tight for the circle".into(),
            ));
        }
        let p = rng.random_range(0.0..TAU);
        let ok = phases.iter().all(|&q| {
            let d = (q - p).abs();
            d.min(TAU - d) >= min_gap
        });
        if ok {
            phases.push(p);
        }
    }
    let terms: Vec<(f64, Complex64)> = phases
        .into_iter()
        .map(|p| {
            let modulus = rng.random_range(0.1..=2.0);
            let arg = rng.random_range(0.0..TAU);
            (p, Complex64::from_polar(modulus, arg))
        })
        .collect();
    Ok(APSequence::new(terms))
}

fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn build_report(
    cfg: &ExperimentConfig,
    results: Value,
    certificates: Value,
    violations: &[Violation],
) -> Value {
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "timestamp": timestamp,
        "command": cfg.command,
        "config": cfg,
        "results": results,
        "certificates": certificates,
        "violations": violations,
    })
}

fn make_system(cfg: &ExperimentConfig) -> Result<GaborSystem, RunError> {
    let window = parse_window_spec(&cfg.window).map_err(core_err)?;
    GaborSystem::new(window, cfg.alpha, cfg.beta).map_err(core_err)
}

/// Modulation truncation: explicit value, or auto-chosen targeting an
/// ℓ-tail of 1e-8 at the largest probed lattice frequency (capped at
/// 20000 for slowly decaying windows; the achieved tail is what gets
/// reported).
fn effective_ell_trunc(cfg: &ExperimentConfig, sys: &GaborSystem, x_max: f64) -> u32 {
    match cfg.ell_trunc {
        Some(l) => l,
        None => frames::auto_ell_trunc(sys, x_max, 1e-8, 20_000),
    }
}

pub fn run(command: &CommandKind) -> Result<RunOutput, RunError> {
    let cfg = resolve_config(command)?;
    match command {
        CommandKind::Bessel(_) => run_bessel(&cfg),
        CommandKind::FrameBounds(_) => run_frame_bounds(&cfg),
        CommandKind::Analyze(_) => run_analyze(&cfg),
        CommandKind::Synthesize(_) => run_synthesize(&cfg),
        CommandKind::Sandwich(_) => run_sandwich(&cfg),
        CommandKind::Subspace(_) => run_subspace(&cfg),
        CommandKind::OracleCheck(_) => run_oracle_check(&cfg),
    }
}

fn run_bessel(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let sys = make_system(cfg)?;
    let gamma = sys.freq_period();
    let mut csv = String::from("lambda,spectral_sum\n");
    let mut sup = 0.0f64;
    let mut max_tail = 0.0f64;
    for i in 0..cfg.grid {
        let lambda = gamma * i as f64 / cfg.grid as f64;
        let value =
            periodized_spectral_sum(sys.window(), lambda, gamma, cfg.p_trunc).map_err(core_err)?;
        max_tail = max_tail.max(sys.window().freq_decay(lambda, gamma, cfg.p_trunc));
        sup = sup.max(value);
        let _ = writeln!(csv, "{},{}", csv_float(lambda), csv_float(value));
    }
    let samples_per_interval = 1024u32;
    let wiener = wiener_norm(sys.window(), cfg.trunc_k, samples_per_interval).map_err(core_err)?;
    let results = json!({
        "gamma": gamma,
        "sup": sup,
        "wiener_norm": {
            "value": wiener,
            "K": cfg.trunc_k,
            "samples_per_interval": samples_per_interval,
            "time_tail": sys.window().time_decay(cfg.trunc_k),
        },
    });
    let certificates = json!({ "tails": max_tail, "slack": 0.0 });
    Ok(RunOutput {
        report: build_report(cfg, results, certificates, &[]),
        csv: Some(csv),
        violations: 0,
    })
}

fn run_frame_bounds(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let sys = make_system(cfg)?;
    let gamma = sys.freq_period();
    let x_max = gamma * (cfg.trunc_k as f64 + 1.0);
    let ell = effective_ell_trunc(cfg, &sys, x_max);
    let (rows, slack) = fiber_eig_sweep(&sys, cfg.grid, cfg.trunc_k, ell).map_err(core_err)?;
    let lower = rows
        .iter()
        .map(|r| r.eig_min)
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let upper = rows
        .iter()
        .map(|r| r.eig_max)
        .fold(f64::NEG_INFINITY, f64::max);
    let bounds = FrameBounds {
        lower,
        upper,
        lambda_grid: cfg.grid,
        trunc_k: cfg.trunc_k,
        ell_trunc: ell,
        certified_slack: slack,
    };
    let mut csv = String::from("lambda,eig_min,eig_max\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{}",
            csv_float(r.lambda),
            csv_float(r.eig_min),
            csv_float(r.eig_max)
        );
    }
    let results = json!({
        "lower": bounds.lower,
        "upper": bounds.upper,
        "ell_trunc": ell,
        "is_frame_certified": bounds.certifies_frame(),
    });
    let dim = 2.0 * cfg.trunc_k as f64 + 1.0;
    let certificates = json!({ "tails": slack / dim, "slack": slack });
    Ok(RunOutput {
        report: build_report(cfg, results, certificates, &[]),
        csv: Some(csv),
        violations: 0,
    })
}

fn read_input<T: serde::de::DeserializeOwned>(cfg: &ExperimentConfig) -> Result<T, RunError> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| usage("this command needs --input"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read input {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("malformed input {path}: {e}")))
}

fn run_analyze(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let sys = make_system(cfg)?;
    let f: TrigPolynomial = read_input(cfg)?;
    let fam = analysis_family(&f, &sys, cfg.tol).map_err(core_err)?;
    let record = AnalysisFamilyRecord::new(&fam, &sys);
    let mut csv = String::from("ell,norm_sqr\n");
    for (ell, seq) in fam.entries() {
        let _ = writeln!(csv, "{ell},{}", csv_float(seq.norm_sqr()));
    }
    let results = json!({
        "bessel_total": fam.bessel_total(),
        "input_norm_sqr": f.norm_sqr(),
        "ell_truncation": fam.ell_truncation(),
        "family": serde_json::to_value(&record).map_err(|e| usage(e.to_string()))?,
    });
    let certificates = json!({ "tails": fam.tail_bound(), "slack": 0.0 });
    Ok(RunOutput {
        report: build_report(cfg, results, certificates, &[]),
        csv: Some(csv),
        violations: 0,
    })
}

fn run_synthesize(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let sys = make_system(cfg)?;
    let a: APSequence = read_input(cfg)?;
    let (poly, cert) = synthesis(&a, sys.window(), cfg.alpha, cfg.p_trunc).map_err(core_err)?;
    let mut csv = String::from("freq,re,im\n");
    for t in poly.terms() {
        let _ = writeln!(
            csv,
            "{},{},{}",
            csv_float(t.freq),
            csv_float(t.coeff.re),
            csv_float(t.coeff.im)
        );
    }
    let results = json!({
        "polynomial": serde_json::to_value(&poly).map_err(|e| usage(e.to_string()))?,
        "norm": poly.norm(),
    });
    let certificates = json!({ "tails": cert, "slack": 0.0 });
    Ok(RunOutput {
        report: build_report(cfg, results, certificates, &[]),
        csv: Some(csv),
        violations: 0,
    })
}

fn run_sandwich(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let sys = make_system(cfg)?;
    let gamma = sys.freq_period();
    let lattice_reach = gamma * (cfg.trunc_k as f64 + 1.0);
    let ell = effective_ell_trunc(cfg, &sys, lattice_reach.max(cfg.freq_max.abs()));
    let (rows, slack) = fiber_eig_sweep(&sys, cfg.grid, cfg.trunc_k, ell).map_err(core_err)?;
    let lower = rows
        .iter()
        .map(|r| r.eig_min)
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let upper = rows
        .iter()
        .map(|r| r.eig_max)
        .fold(f64::NEG_INFINITY, f64::max);
    let bounds = FrameBounds {
        lower,
        upper,
        lambda_grid: cfg.grid,
        trunc_k: cfg.trunc_k,
        ell_trunc: ell,
        certified_slack: slack,
    };

    let mut violations = Vec::new();
    if !bounds.certifies_frame() {
        violations.push(Violation {
            inequality: "A - slack > 0".into(),
            lower: 0.0,
            value: bounds.lower - bounds.certified_slack,
            upper: bounds.lower,
            detail: format!(
                "lower frame bound A = {:.6e} does not survive its slack {:.3e}; \
                 the sandwich lower inequality is vacuous",
                bounds.lower, bounds.certified_slack
            ),
        });
    }

    let mut csv = String::from("trial,norm_sqr,energy,ratio,passed\n");
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    let mut passed = 0u32;
    for trial in 0..cfg.trials {
        let f = generate_random_polynomial(
            cfg.seed.wrapping_add(trial as u64),
            cfg.terms,
            (cfg.freq_min, cfg.freq_max),
            cfg.min_gap,
        )
        .map_err(core_err)?;
        let report = frame_sandwich_check(&f, &sys, &bounds, cfg.tol).map_err(core_err)?;
        let ratio = report.ratio();
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
        if report.passed {
            passed += 1;
        } else {
            violations.push(Violation {
                inequality: "(A - slack - tol)·|f|^2 <= S(f) <= (B + slack + tol)·|f|^2".into(),
                lower: report.lower,
                value: report.energy,
                upper: report.upper,
                detail: format!("trial {trial} failed the energy sandwich"),
            });
        }
        let _ = writeln!(
            csv,
            "{trial},{},{},{},{}",
            csv_float(report.norm_sqr),
            csv_float(report.energy),
            csv_float(ratio),
            report.passed
        );
    }
    let results = json!({
        "lower": bounds.lower,
        "upper": bounds.upper,
        "ell_trunc": ell,
        "trials": cfg.trials,
        "trials_passed": passed,
        "min_ratio": min_ratio,
        "max_ratio": max_ratio,
        "is_frame_certified": bounds.certifies_frame(),
    });
    let certificates = json!({ "tails": cfg.tol, "slack": slack });
    let n_violations = violations.len();
    Ok(RunOutput {
        report: build_report(cfg, results, certificates, &violations),
        csv: Some(csv),
        violations: n_violations,
    })
}

fn run_subspace(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let sys = make_system(cfg)?;
    let mu: Vec<f64> = match (&cfg.spectrum, &cfg.input) {
        (Some(list), _) => list.clone(),
        (None, Some(_)) => {
            #[derive(Deserialize)]
            struct SpectrumInput {
                mu: Vec<f64>,
            }
            read_input::<SpectrumInput>(cfg)?.mu
        }
        (None, None) => return Err(usage("subspace needs --spectrum or --input")),
    };
    let set = SpectrumSet::new(mu);
    let x_max = set.points().iter().fold(1.0f64, |acc, &m| acc.max(m.abs()));
    let ell = effective_ell_trunc(cfg, &sys, x_max);

    let mut violations = Vec::new();
    let mut bounds = None;
    match subspace_frame_bounds(&set, &sys, ell) {
        Ok(b) => bounds = Some(b),
        Err(CoreError::ResidueCollision { i, mu_i, j, mu_j }) => violations.push(Violation {
            inequality: "mu_i - mu_j not in (2*pi/alpha)*Z".into(),
            lower: mu_i,
            value: (mu_i - mu_j).abs(),
            upper: mu_j,
            detail: format!(
                "spectrum points {i} and {j} share a residue class; \
                 the distinct-residue construction does not apply"
            ),
        }),
        Err(e) => return Err(core_err(e)),
    }

    let finite = cfg
        .finite_ell
        .as_ref()
        .map(|f_set| finite_modulation_failure(&set, &sys, f_set));

    let mut csv = String::from("j,mu,diagonal_sum,finite_sum\n");
    for (j, &m) in set.points().iter().enumerate() {
        let s: f64 = (-(ell as i64)..=ell as i64)
            .map(|l| sys.window().fourier(m - l as f64 * sys.beta()).norm_sqr())
            .sum::<f64>()
            + sys.window().freq_decay(m, sys.beta(), ell);
        let fin = finite.as_ref().map(|v| v[j]).unwrap_or(0.0);
        let _ = writeln!(
            csv,
            "{j},{},{},{}",
            csv_float(m),
            csv_float(s),
            csv_float(fin)
        );
    }

    let results = json!({
        "points": set.points(),
        "lower": bounds.map(|b| b.0),
        "upper": bounds.map(|b| b.1),
        "ell_trunc": ell,
        "finite_modulation": finite,
    });
    let tail_max = set
        .points()
        .iter()
        .map(|&m| sys.window().freq_decay(m, sys.beta(), ell))
        .fold(0.0f64, f64::max);
    let certificates = json!({ "tails": tail_max, "slack": 0.0 });
    let n_violations = violations.len();
    Ok(RunOutput {
        report: build_report(cfg, results, certificates, &violations),
        csv: Some(csv),
        violations: n_violations,
    })
}

fn run_oracle_check(cfg: &ExperimentConfig) -> Result<RunOutput, RunError> {
    let sys = make_system(cfg)?;
    let a = APSequence::exponential(cfg.phase);
    let oracle = periodization_oracle(
        &a,
        sys.window(),
        cfg.alpha,
        cfg.mu,
        cfg.t_max,
        cfg.dt,
        cfg.trunc_k,
    )
    .map_err(core_err)?;
    // Closed form: the synthesis coefficient alpha^{-1} psi_hat(mu) (a, e~_{mu alpha}).
    let weight = a.coefficient(cfg.mu * cfg.alpha);
    let closed = sys.window().fourier(cfg.mu) * weight / cfg.alpha;
    let abs_err = (oracle - closed).norm();
    let rel_err = if closed.norm() > 0.0 {
        abs_err / closed.norm()
    } else {
        abs_err
    };
    let mut violations = Vec::new();
    if rel_err > cfg.rel_tol {
        violations.push(Violation {
            inequality: "|oracle - closed| / |closed| <= rel_tol".into(),
            lower: 0.0,
            value: rel_err,
            upper: cfg.rel_tol,
            detail: "periodization oracle disagrees with the closed-form coefficient".into(),
        });
    }
    let results = json!({
        "oracle": { "re": oracle.re, "im": oracle.im },
        "closed_form": { "re": closed.re, "im": closed.im },
        "abs_error": abs_err,
        "rel_error": rel_err,
    });
    let certificates = json!({ "tails": 0.0, "slack": cfg.rel_tol });
    let n_violations = violations.len();
    Ok(RunOutput {
        report: build_report(cfg, results, certificates, &violations),
        csv: None,
        violations: n_violations,
    })
}

/// Writes the report (file or stdout) and the CSV, then returns the exit
/// code: 0 clean, 2 when violations were recorded.
pub fn emit(
    output: &RunOutput,
    out_json: &Option<PathBuf>,
    out_csv: &Option<PathBuf>,
) -> Result<i32, RunError> {
    let rendered = serde_json::to_string_pretty(&output.report)
        .map_err(|e| usage(format!("cannot render report: {e}")))?;
    match out_json {
        Some(path) => std::fs::write(path, rendered.as_bytes())
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{rendered}"),
    }
    if let (Some(path), Some(csv)) = (out_csv, &output.csv) {
        std::fs::write(path, csv.as_bytes())
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(if output.violations > 0 { 2 } else { 0 })
}

/// Full CLI entry point; returns the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    // Output paths may come from the flags or the config file.
    let (out_json, out_csv) = match resolve_output_paths(&cli.command) {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    match run(&cli.command) {
        Ok(output) => match emit(&output, &out_json, &out_csv) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
        Err(RunError::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(RunError::Invariant(msg)) => {
            eprintln!("invariant violation: {msg}");
            2
        }
    }
}

fn resolve_output_paths(
    command: &CommandKind,
) -> Result<(Option<PathBuf>, Option<PathBuf>), RunError> {
    let opts = command.options();
    let (flag_json, flag_csv) = (opts.out_json.clone(), opts.out_csv.clone());
    if flag_json.is_some() && flag_csv.is_some() {
        return Ok((flag_json, flag_csv));
    }
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config file {}: {e}", path.display())))?;
        let from_file: RawOptions = serde_json::from_str(&text)
            .map_err(|e| usage(format!("malformed config file {}: {e}", path.display())))?;
        return Ok((
            flag_json.or(from_file.out_json),
            flag_csv.or(from_file.out_csv),
        ));
    }
    Ok((flag_json, flag_csv))
}
