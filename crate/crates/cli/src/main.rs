//! Command-line driver for the `gated-spectra` library: reproducible
//! spectrum overlays, phase diagrams, scaling sweeps, slow-mode statistics,
//! fixed-point tables, norm-growth estimates, and the acceptance suite.
//!
//! Every command is deterministic given its seeds and configuration: linear
//! algebra is pinned sequential, sweep reductions collect in submission
//! order, and all floating-point text is written with 17 significant digits,
//! so a rerun reproduces each output file byte for byte.
//!
//! Configuration precedence is flags > JSON config file (`--config`) >
//! built-in defaults; the defaults are n = 1000, a_h = 3, zero biases,
//! seed 1, and GRU gate gains (a_z, a_r) = (1, 10).

use clap::{Args, Parser, Subcommand, ValueEnum};
use gated_spectra::acceptance::{run_all, transition_layer_units, AcceptanceOpts};
use gated_spectra::empirics::{
    cdf_near_one, compare_boundary, fit_loglog, growth_rates, norm_moment_sequence,
    pool_by_value, radius_scaling_sweep, EigenCloud,
};
use gated_spectra::io::{svg_spectrum, write_csv_cloud, write_csv_loops, write_csv_rows, write_json};
use gated_spectra::mft::gru_fp_solve;
use gated_spectra::moments::SampleMoments;
use gated_spectra::net::{
    jacobian_gru, jacobian_lstm, run_to_steady, sample_network, state_jacobian, GruState,
    LstmState, RunOpts,
};
use gated_spectra::phase::{bifurcation_curve, classify, phase_sweep, PhasePoint};
use gated_spectra::spectral::{
    fit_cdf_erfc, gru_zero_fp_density, lstm_zero_fp_density, GruCurveKind, GruSCurve,
    LimitingDensity, LstmSCurve,
};
use gated_spectra::{Activation, Arch, Error, Gate, GatedNetParams};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fmt;
use std::path::{Path, PathBuf};

/// Contour-marching grid for support-boundary tracing.
const BOUNDARY_GRID: usize = 300;
/// Refinement steps per boundary vertex.
const BOUNDARY_REFINE: usize = 40;

// ---------------------------------------------------------------------------
// Error handling and exit codes.
// ---------------------------------------------------------------------------

/// 0 = success, 1 = acceptance failure, 2 = usage error, 3 = numerical error.
enum CliError {
    Usage(String),
    Lib(Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            // Parameter validation failures originate from flag values, so
            // they are usage errors too; everything else (eigensolver
            // breakdown, non-convergence, I/O) is a runtime failure.
            CliError::Lib(Error::InvalidParams(_)) => 2,
            CliError::Lib(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn main() {
    std::process::exit(match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    });
}

// ---------------------------------------------------------------------------
// Flags.
// ---------------------------------------------------------------------------

const AFTER_HELP: &str = "\
Exit codes:
  0  success
  1  one or more acceptance checks failed
  2  usage error (bad flags, bad config file, wrong-architecture gate flag)
  3  numerical or runtime failure

Formats:
  csv  (default) data tables plus a run report JSON
  json data tables plus a report JSON that also embeds the full data arrays
  svg  data tables, report, and a static SVG figure

Configuration precedence: flags > --config JSON > defaults. The config file
may set any of: n, ah, az, ar, af, ai, ao, activation, bias {gate: mean},
bias_var {gate: variance}, seeds, output_dir, format, threads. Gate gains
that do not belong to the running command's architecture are ignored when
they come from the config file and rejected when passed as flags.

GATED_SPECTRA_THREADS caps sweep parallelism like --threads. Outputs are
byte-identical across reruns with the same seeds and configuration.";

#[derive(Parser)]
#[command(
    name = "gated-spectra",
    version,
    about = "Spectra of random gated recurrent networks: simulation, theory overlays, and checks",
    after_help = AFTER_HELP
)]
struct Cli {
    /// JSON config file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory all artifacts are written into (created if missing).
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    /// Artifact set to write (see --help footer).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// RNG seeds; one full realization per seed. Repeatable or
    /// comma-separated.
    #[arg(long, global = true, value_delimiter = ',', value_name = "SEED")]
    seed: Option<Vec<u64>>,

    /// Worker-thread cap for parameter sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// GRU steady-state Jacobian spectrum with the predicted support
    /// boundary.
    ///
    /// Writes `<slug>_cloud.csv` (re,im), `<slug>_boundary.csv`
    /// (loop,vertex,re,im) for the preferred support curve,
    /// `<slug>_bound_*.csv` for the remaining bounding curves, and
    /// `<slug>_report.json` with the boundary comparison. With --format svg
    /// also writes `<slug>_spectrum.svg`.
    Spectrum(SpectrumArgs),

    /// LSTM steady-state Jacobian spectrum with the predicted support
    /// boundary.
    ///
    /// Same artifacts as `spectrum`, for the 2n-dimensional (cell, hidden)
    /// Jacobian and the LSTM support curve.
    LstmSpectrum(SpectrumArgs),

    /// Fixed-point phase diagram over the (candidate gain, reset gain)
    /// plane.
    ///
    /// Writes `phase_raster_<G>.csv` (a_h,a_r,region,n_fp,marginal) with
    /// region codes 0 = stable origin only, 1 = coexistence, 2 = unstable
    /// origin, `phase_fold_curve.csv` (a_h,a_r_fold), a `phase_report.json`,
    /// and always a `phase_diagram_<G>.svg` heat map.
    PhaseDiagram(PhaseDiagramArgs),

    /// Steady-state spectral radius against one gate gain with a log-log
    /// fit.
    ///
    /// Writes `radius_scaling_<arch>_<gate>.csv`
    /// (value,seed,radius_measured,radius_predicted,c_h,stationary) and a
    /// report JSON with pooled means and fitted exponents. Gate gains other
    /// than the swept one default to 0 here (the clean scaling regime);
    /// a_h defaults to 3.
    RadiusScaling(RadiusScalingArgs),

    /// Eigenvalue mass near λ = 1 as the leak gate's gain grows, with a
    /// complementary-error-function fit.
    ///
    /// Writes `cdf_accumulation_<arch>.csv` (gain,cdf) and a report JSON
    /// with the fit. The swept gate is the update gate (GRU) or forget gate
    /// (LSTM); other gate gains default to 0, a_h to 3.
    CdfAccumulation(CdfAccumulationArgs),

    /// Mean-field fixed points of the GRU along a reset-gain grid.
    ///
    /// Writes `fixed_points.csv`
    /// (a_r,branch,c_h,c_y,rho0,stable,residual) with branch codes
    /// 0 = zero, 1 = smaller nonzero root, 2 = largest nonzero root, and a
    /// report JSON with per-point region labels.
    FixedPoints(FixedPointsArgs),

    /// Norm-growth (Gelfand) spectral-radius estimate against the
    /// eigensolver.
    ///
    /// Writes `<slug>_gelfand.csv` (k,norm_moment,growth_rate) and a report
    /// JSON comparing the top-order growth rate with the measured spectral
    /// radius.
    Gelfand(GelfandArgs),

    /// Run the numbered acceptance checks and write a verdict report.
    ///
    /// Prints one PASS/FAIL line per check, writes
    /// `acceptance_report.json`, and exits 1 if any check fails. Width 500
    /// applies the documented 1.5× tolerance widening; without --n the
    /// width is probed with one representative eigensolve.
    Acceptance(AcceptanceArgs),
}

/// Network parameters as flags. Gains of the other architecture are
/// rejected; biases are given per gate as `GATE=VALUE` with gate labels
/// z, r (GRU), f, i, o (LSTM), and h.
#[derive(Args, Clone, Default)]
struct ParamsArgs {
    /// Hidden width n.
    #[arg(long)]
    n: Option<usize>,

    /// Candidate-branch gain a_h.
    #[arg(long)]
    ah: Option<f64>,

    /// GRU update-gate gain a_z.
    #[arg(long)]
    az: Option<f64>,

    /// GRU reset-gate gain a_r.
    #[arg(long)]
    ar: Option<f64>,

    /// LSTM forget-gate gain a_f.
    #[arg(long)]
    af: Option<f64>,

    /// LSTM input-gate gain a_i.
    #[arg(long)]
    ai: Option<f64>,

    /// LSTM output-gate gain a_o.
    #[arg(long)]
    ao: Option<f64>,

    /// Gate bias mean, e.g. --bias z=-2 (repeatable).
    #[arg(long, value_name = "GATE=VALUE")]
    bias: Vec<String>,

    /// Gate bias variance, e.g. --bias-var r=0.5 (repeatable).
    #[arg(long, value_name = "GATE=VALUE")]
    bias_var: Vec<String>,

    /// Candidate activation.
    #[arg(long, value_enum)]
    activation: Option<ActivationArg>,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    params: ParamsArgs,
}

#[derive(Args)]
struct PhaseDiagramArgs {
    #[command(flatten)]
    params: ParamsArgs,

    /// Grid as COLSxROWS over (a_h, a_r), e.g. 40x40.
    #[arg(long, value_name = "AHxAR")]
    grid: Option<String>,

    /// Candidate-gain range lower edge.
    #[arg(long, default_value_t = 1.0)]
    ah_min: f64,

    /// Candidate-gain range upper edge.
    #[arg(long, default_value_t = 3.0)]
    ah_max: f64,

    /// Reset-gain range lower edge.
    #[arg(long, default_value_t = 0.0)]
    ar_min: f64,

    /// Reset-gain range upper edge.
    #[arg(long, default_value_t = 12.0)]
    ar_max: f64,

    /// Scaled update-gate offset b_z/a_z used by the marginal-stability
    /// overlay.
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
}

#[derive(Args)]
struct RadiusScalingArgs {
    #[command(flatten)]
    params: ParamsArgs,

    /// Architecture to sweep.
    #[arg(long, value_enum, default_value_t = ArchArg::Gru)]
    arch: ArchArg,

    /// Swept gate label (z, r, or h for the GRU; f, i, o, or h for the
    /// LSTM). Defaults to the reset gate (GRU) or input gate (LSTM).
    #[arg(long)]
    gate: Option<char>,

    /// Swept gain values.
    #[arg(long, value_delimiter = ',', value_name = "GAIN")]
    values: Option<Vec<f64>>,
}

#[derive(Args)]
struct CdfAccumulationArgs {
    #[command(flatten)]
    params: ParamsArgs,

    /// Architecture to sweep.
    #[arg(long, value_enum, default_value_t = ArchArg::Gru)]
    arch: ArchArg,

    /// Leak-gate gains at which the spectrum is measured.
    #[arg(long, value_delimiter = ',', value_name = "GAIN")]
    gains: Option<Vec<f64>>,

    /// Radius of the window around λ = 1 whose eigenvalue mass is counted.
    #[arg(long, default_value_t = 0.05)]
    window: f64,
}

#[derive(Args)]
struct FixedPointsArgs {
    #[command(flatten)]
    params: ParamsArgs,

    /// Reset-gain grid; when omitted, only the single configured point is
    /// solved.
    #[arg(long, value_delimiter = ',', value_name = "GAIN")]
    ar_values: Option<Vec<f64>>,
}

#[derive(Args)]
struct GelfandArgs {
    #[command(flatten)]
    params: ParamsArgs,

    /// Highest norm-moment order.
    #[arg(long, default_value_t = 32)]
    orders: u32,

    /// Evaluate the Jacobian at the zero state instead of the simulated
    /// steady state.
    #[arg(long)]
    at_zero: bool,
}

#[derive(Args)]
struct AcceptanceArgs {
    /// Run only matching checks: an id like 3 or a name substring like
    /// zero-fp. Repeatable or comma-separated.
    #[arg(long, value_delimiter = ',', value_name = "PATTERN")]
    only: Option<Vec<String>>,

    /// Width override; omitting it probes the host and picks 1000 or the
    /// 500 fallback.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ArchArg {
    Gru,
    Lstm,
}

impl ArchArg {
    fn arch(self) -> Arch {
        match self {
            ArchArg::Gru => Arch::Gru,
            ArchArg::Lstm => Arch::Lstm,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ActivationArg {
    Tanh,
    HardTanh,
}

impl ActivationArg {
    fn activation(self) -> Activation {
        match self {
            ActivationArg::Tanh => Activation::Tanh,
            ActivationArg::HardTanh => Activation::HardTanh,
        }
    }
}

// ---------------------------------------------------------------------------
// Config file and resolution.
// ---------------------------------------------------------------------------

/// Optional defaults loaded from `--config`; every field is overridden by
/// the matching flag when that flag is present.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    ah: Option<f64>,
    az: Option<f64>,
    ar: Option<f64>,
    af: Option<f64>,
    ai: Option<f64>,
    ao: Option<f64>,
    activation: Option<ActivationArg>,
    /// Gate label → bias mean.
    bias: Option<std::collections::BTreeMap<String, f64>>,
    /// Gate label → bias variance.
    bias_var: Option<std::collections::BTreeMap<String, f64>>,
    seeds: Option<Vec<u64>>,
    output_dir: Option<PathBuf>,
    format: Option<Format>,
    threads: Option<usize>,
}

/// The fully resolved run configuration, echoed into every report JSON so
/// an artifact names the exact inputs that produced it.
#[derive(Serialize)]
struct RunConfig {
    command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<GatedNetParams>,
    seeds: Vec<u64>,
    output_dir: PathBuf,
    format: Format,
}

/// Common resolved settings shared by every command.
struct Common {
    seeds: Vec<u64>,
    output_dir: PathBuf,
    format: Format,
}

impl Common {
    fn run_config(&self, command: &str, params: Option<GatedNetParams>) -> RunConfig {
        RunConfig {
            command: command.to_string(),
            params,
            seeds: self.seeds.clone(),
            output_dir: self.output_dir.clone(),
            format: self.format,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

fn load_config(path: Option<&Path>) -> CliResult<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| usage(format!("bad config {}: {e}", path.display())))
}

fn parse_gate(label: &str) -> CliResult<Gate> {
    match label {
        "z" => Ok(Gate::Z),
        "r" => Ok(Gate::R),
        "f" => Ok(Gate::F),
        "i" => Ok(Gate::I),
        "o" => Ok(Gate::O),
        "h" => Ok(Gate::H),
        _ => Err(usage(format!(
            "unknown gate label {label:?} (expected one of z, r, f, i, o, h)"
        ))),
    }
}

fn parse_gate_assignment(s: &str) -> CliResult<(Gate, f64)> {
    let (label, value) = s
        .split_once('=')
        .ok_or_else(|| usage(format!("expected GATE=VALUE, got {s:?}")))?;
    let gate = parse_gate(label.trim())?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| usage(format!("bad numeric value in {s:?}")))?;
    Ok((gate, value))
}

/// How unset gate gains are filled in.
#[derive(Clone, Copy, PartialEq)]
enum GainDefaults {
    /// The reference parameter point: (a_z, a_r) = (1, 10) for the GRU,
    /// (a_f, a_i, a_o) = (1, 1, 10) for the LSTM.
    Figure,
    /// Sweep regime: every non-candidate gain defaults to 0 so the swept
    /// gate acts alone.
    Zero,
}

/// Builds the network parameters for `arch` from flags, config, and
/// defaults, rejecting flags that belong to the other architecture.
fn resolve_params(
    args: &ParamsArgs,
    cfg: &FileConfig,
    arch: Arch,
    defaults: GainDefaults,
) -> CliResult<GatedNetParams> {
    let wrong: &[(&str, Option<f64>)] = match arch {
        Arch::Gru => &[("--af", args.af), ("--ai", args.ai), ("--ao", args.ao)],
        Arch::Lstm => &[("--az", args.az), ("--ar", args.ar)],
        Arch::Vanilla => &[],
    };
    for (flag, value) in wrong {
        if value.is_some() {
            return Err(usage(format!(
                "{flag} does not apply to a {} command",
                arch.name()
            )));
        }
    }

    let n = args.n.or(cfg.n).unwrap_or(1000);
    let ah = args.ah.or(cfg.ah).unwrap_or(3.0);
    let pick = |flag: Option<f64>, file: Option<f64>, figure: f64| match defaults {
        GainDefaults::Figure => flag.or(file).unwrap_or(figure),
        GainDefaults::Zero => flag.or(file).unwrap_or(0.0),
    };
    let mut params = match arch {
        Arch::Gru => GatedNetParams::gru(
            n,
            pick(args.az, cfg.az, 1.0),
            pick(args.ar, cfg.ar, 10.0),
            ah,
        ),
        Arch::Lstm => GatedNetParams::lstm(
            n,
            pick(args.af, cfg.af, 1.0),
            pick(args.ai, cfg.ai, 1.0),
            pick(args.ao, cfg.ao, 10.0),
            ah,
        ),
        Arch::Vanilla => GatedNetParams::vanilla(n, ah),
    };

    if let Some(a) = args.activation.or(cfg.activation) {
        params = params.with_activation(a.activation());
    }

    // Config biases first (wrong-architecture entries ignored), then flag
    // biases (wrong-architecture entries rejected).
    for (map, is_var) in [(&cfg.bias, false), (&cfg.bias_var, true)] {
        if let Some(map) = map {
            for (label, &value) in map {
                let gate = parse_gate(label)?;
                if !params.arch.gates().contains(&gate) {
                    continue;
                }
                params = if is_var {
                    params.with_bias_var(gate, value)
                } else {
                    params.with_bias_mean(gate, value)
                };
            }
        }
    }
    for (entries, is_var) in [(&args.bias, false), (&args.bias_var, true)] {
        for entry in entries.iter() {
            let (gate, value) = parse_gate_assignment(entry)?;
            if !params.arch.gates().contains(&gate) {
                return Err(usage(format!(
                    "gate {} does not belong to a {} network",
                    gate.label(),
                    params.arch.name()
                )));
            }
            params = if is_var {
                params.with_bias_var(gate, value)
            } else {
                params.with_bias_mean(gate, value)
            };
        }
    }

    params.validate()?;
    Ok(params)
}

// ---------------------------------------------------------------------------
// Dispatch.
// ---------------------------------------------------------------------------

fn run() -> CliResult<i32> {
    let cli = Cli::parse();
    let cfg = load_config(cli.config.as_deref())?;

    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("GATED_SPECTRA_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .or(cfg.threads);
    if let Some(t) = threads {
        if t == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        // A second invocation in the same process (tests) leaves the
        // existing pool in place.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    gated_spectra::init_deterministic();

    let seeds = cli
        .seed
        .or_else(|| cfg.seeds.clone())
        .unwrap_or_else(|| vec![1]);
    if seeds.is_empty() {
        return Err(usage("at least one --seed is required"));
    }
    let output_dir = cli
        .output_dir
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&output_dir)
        .map_err(|e| usage(format!("output dir {} is not writable: {e}", output_dir.display())))?;
    let common = Common {
        seeds,
        output_dir,
        format: cli.format.or(cfg.format).unwrap_or(Format::Csv),
    };

    match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(Arch::Gru, a, &cfg, &common),
        Command::LstmSpectrum(a) => cmd_spectrum(Arch::Lstm, a, &cfg, &common),
        Command::PhaseDiagram(a) => cmd_phase_diagram(a, &cfg, &common),
        Command::RadiusScaling(a) => cmd_radius_scaling(a, &cfg, &common),
        Command::CdfAccumulation(a) => cmd_cdf_accumulation(a, &cfg, &common),
        Command::FixedPoints(a) => cmd_fixed_points(a, &cfg, &common),
        Command::Gelfand(a) => cmd_gelfand(a, &cfg, &common),
        Command::Acceptance(a) => cmd_acceptance(a, &cfg, &common),
    }
}

fn note_written(path: &Path) {
    println!("wrote {}", path.display());
}

// ---------------------------------------------------------------------------
// spectrum / lstm-spectrum
// ---------------------------------------------------------------------------

fn kind_tag(kind: GruCurveKind) -> &'static str {
    match kind {
        GruCurveKind::Exact => "exact",
        GruCurveKind::BoundingInner => "inner",
        GruCurveKind::BoundingOuter => "outer",
    }
}

/// Closed-form zero-fixed-point law when it applies at these parameters
/// (deterministic gate biases, centered candidate); `None` otherwise.
fn zero_fp_summary(params: &GatedNetParams) -> Option<serde_json::Value> {
    let density: LimitingDensity = match params.arch {
        Arch::Gru => gru_zero_fp_density(params).ok()?,
        Arch::Lstm => lstm_zero_fp_density(params).ok()?,
        Arch::Vanilla => return None,
    };
    let note = if density.stable {
        "the zero fixed point is stable: long runs settle at the origin and \
         the Jacobian spectrum follows this atom-plus-disk law"
    } else {
        "the zero fixed point exists but is unstable at these parameters"
    };
    Some(json!({
        "stable": density.stable,
        "disk_center": [density.center.re, density.center.im],
        "disk_radius": density.radius,
        "atoms": density.atoms.iter().map(|a| json!({
            "location": [a.location.re, a.location.im],
            "mass": a.mass,
        })).collect::<Vec<_>>(),
        "note": note,
    }))
}

fn cloud_json(values: &[Complex64]) -> serde_json::Value {
    json!({
        "re": values.iter().map(|v| v.re).collect::<Vec<_>>(),
        "im": values.iter().map(|v| v.im).collect::<Vec<_>>(),
    })
}

fn loops_json(loops: &[Vec<Complex64>]) -> serde_json::Value {
    json!(loops
        .iter()
        .map(|l| l
            .iter()
            .map(|p| vec![p.re, p.im])
            .collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn cmd_spectrum(
    arch: Arch,
    args: &SpectrumArgs,
    cfg: &FileConfig,
    common: &Common,
) -> CliResult<i32> {
    let params = resolve_params(&args.params, cfg, arch, GainDefaults::Figure)?;
    let command = match arch {
        Arch::Gru => "spectrum",
        _ => "lstm-spectrum",
    };

    for &seed in &common.seeds {
        let slug = params.slug(seed);
        let net = sample_network(&params, seed)?;
        let run = run_to_steady(&net, seed, &RunOpts::default())?;
        let j = state_jacobian(&net, run.final_state())?;
        let cloud = EigenCloud::from_jacobian(arch, &j)?;
        let moments = SampleMoments::from_states(&run.snapshots)?;

        // Preferred support curve plus any sibling bounding curves.
        let mut curves: Vec<(&'static str, Vec<Vec<Complex64>>)> = Vec::new();
        let (radius_predicted, curve_info) = match arch {
            Arch::Gru => {
                let preferred = GruCurveKind::preferred(&params);
                let main = GruSCurve::from_moments(&params, &moments, preferred)?;
                curves.push(("boundary", main.boundary(BOUNDARY_GRID, BOUNDARY_REFINE)?));
                for kind in [
                    GruCurveKind::Exact,
                    GruCurveKind::BoundingInner,
                    GruCurveKind::BoundingOuter,
                ] {
                    if kind == preferred {
                        continue;
                    }
                    let curve = GruSCurve::from_moments(&params, &moments, kind)?;
                    let tag = match kind_tag(kind) {
                        "exact" => "bound_exact",
                        "inner" => "bound_inner",
                        _ => "bound_outer",
                    };
                    curves.push((tag, curve.boundary(BOUNDARY_GRID, BOUNDARY_REFINE)?));
                }
                (
                    main.spectral_radius()?,
                    json!({ "kind": kind_tag(preferred), "rho_sq": main.rho_sq() }),
                )
            }
            Arch::Lstm => {
                let curve = LstmSCurve::from_moments(&params, &moments)?;
                curves.push(("boundary", curve.boundary(BOUNDARY_GRID, BOUNDARY_REFINE)?));
                (curve.spectral_radius()?, json!({ "e_q": curve.e_q() }))
            }
            Arch::Vanilla => unreachable!("vanilla networks have no spectrum command"),
        };

        let comparison = compare_boundary(&cloud, &curves[0].1, 0.02 * cloud.radius())?;

        let mut files = Vec::new();
        let cloud_path = common.path(&format!("{slug}_cloud.csv"));
        write_csv_cloud(&cloud_path, &cloud.values)?;
        note_written(&cloud_path);
        files.push(cloud_path);
        for (tag, loops) in &curves {
            let path = common.path(&format!("{slug}_{tag}.csv"));
            write_csv_loops(&path, loops)?;
            note_written(&path);
            files.push(path);
        }
        if common.format == Format::Svg {
            let all_loops: Vec<Vec<Complex64>> =
                curves.iter().flat_map(|(_, l)| l.clone()).collect();
            let path = common.path(&format!("{slug}_spectrum.svg"));
            svg_spectrum(&path, &cloud.values, &all_loops, true)?;
            note_written(&path);
            files.push(path);
        }

        let mut report = json!({
            "run_config": common.run_config(command, Some(params)),
            "seed": seed,
            "c_h": run.c_h,
            "stationary": run.stationary,
            "radius_measured": cloud.radius(),
            "radius_predicted": radius_predicted,
            "curve": curve_info,
            "comparison": comparison,
            "zero_fp": zero_fp_summary(&params),
            "files": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        });
        if common.format == Format::Json {
            report["cloud"] = cloud_json(&cloud.values);
            report["curves"] = json!(curves
                .iter()
                .map(|(tag, loops)| json!({ "tag": tag, "loops": loops_json(loops) }))
                .collect::<Vec<_>>());
        }
        let report_path = common.path(&format!("{slug}_report.json"));
        write_json(&report_path, &report)?;
        note_written(&report_path);
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// phase-diagram
// ---------------------------------------------------------------------------

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2, "a grid axis needs at least two nodes");
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| lo + step * i as f64).collect()
}

fn cmd_phase_diagram(
    args: &PhaseDiagramArgs,
    cfg: &FileConfig,
    common: &Common,
) -> CliResult<i32> {
    let params = resolve_params(&args.params, cfg, Arch::Gru, GainDefaults::Figure)?;
    let (n_ah, n_ar) = match args.grid.as_deref() {
        None => (40, 40),
        Some(spec) => {
            let parts: Vec<&str> = spec.split('x').collect();
            let parsed: Option<(usize, usize)> = match parts.as_slice() {
                [a, b] => a.parse().ok().zip(b.parse().ok()),
                _ => None,
            };
            parsed
                .filter(|&(a, b)| a >= 2 && b >= 2)
                .ok_or_else(|| usage(format!("bad --grid {spec:?}, expected e.g. 40x40")))?
        }
    };
    if !(args.ah_min < args.ah_max) || !(args.ar_min < args.ar_max) {
        return Err(usage("grid ranges must satisfy min < max"));
    }

    let ah_values = linspace(args.ah_min, args.ah_max, n_ah);
    let ar_values = linspace(args.ar_min, args.ar_max, n_ar);
    let sweep = phase_sweep(&params, &ah_values, &ar_values, args.beta)?;

    // The fold line lives at candidate gains in (√2, 2); trace the part of
    // it that crosses the requested window.
    let fold_lo = (std::f64::consts::SQRT_2 + 1e-4).max(args.ah_min);
    let fold_hi = 1.9999f64.min(args.ah_max);
    let fold: Vec<(f64, f64)> = if fold_lo < fold_hi {
        bifurcation_curve(&params, &linspace(fold_lo, fold_hi, 25), 1e-4)?
            .into_iter()
            .filter_map(|(ah, ar)| ar.map(|ar| (ah, ar)))
            .collect()
    } else {
        Vec::new()
    };

    let raster_rows: Vec<Vec<f64>> = sweep
        .points
        .iter()
        .map(|p| {
            vec![
                p.a_h,
                p.a_r,
                p.region.code() as f64,
                p.n_fixed_points as f64,
                p.marginal as u8 as f64,
            ]
        })
        .collect();
    let raster_path = common.path(&format!("phase_raster_{n_ah}x{n_ar}.csv"));
    write_csv_rows(
        &raster_path,
        &["a_h", "a_r", "region", "n_fp", "marginal"],
        &raster_rows,
    )?;
    note_written(&raster_path);

    let fold_path = common.path("phase_fold_curve.csv");
    write_csv_rows(
        &fold_path,
        &["a_h", "a_r_fold"],
        &fold.iter().map(|&(a, b)| vec![a, b]).collect::<Vec<_>>(),
    )?;
    note_written(&fold_path);

    let svg_path = common.path(&format!("phase_diagram_{n_ah}x{n_ar}.svg"));
    svg_phase(&svg_path, &sweep.points, &ah_values, &ar_values, &fold)?;
    note_written(&svg_path);

    let mut region_counts = [0usize; 3];
    for p in &sweep.points {
        region_counts[p.region.code() as usize] += 1;
    }
    let mut report = json!({
        "run_config": common.run_config("phase-diagram", Some(params)),
        "grid": { "a_h": [args.ah_min, args.ah_max, n_ah],
                  "a_r": [args.ar_min, args.ar_max, n_ar] },
        "beta": args.beta,
        "region_counts": {
            "origin_only": region_counts[0],
            "coexistence": region_counts[1],
            "origin_unstable": region_counts[2],
        },
        "marginal_nodes": sweep.points.iter().filter(|p| p.marginal).count(),
        "fold_curve": fold,
        "failures": sweep.failures,
    });
    if common.format == Format::Json {
        report["raster"] = json!(sweep.points);
    }
    let report_path = common.path("phase_report.json");
    write_json(&report_path, &report)?;
    note_written(&report_path);
    Ok(0)
}

/// Minimal static heat map: one rect per grid node colored by region, a
/// darker overlay where the marginal-stability test holds, and the fold
/// line. Region colors: 0 stable-origin-only (blue), 1 coexistence (green),
/// 2 unstable origin (orange).
fn svg_phase(
    path: &Path,
    points: &[PhasePoint],
    ah_values: &[f64],
    ar_values: &[f64],
    fold: &[(f64, f64)],
) -> CliResult<()> {
    const SIZE: f64 = 720.0;
    const MARGIN: f64 = 40.0;
    let plot = SIZE - 2.0 * MARGIN;
    let (ah0, ah1) = (ah_values[0], *ah_values.last().unwrap());
    let (ar0, ar1) = (ar_values[0], *ar_values.last().unwrap());
    let x = |ah: f64| MARGIN + (ah - ah0) / (ah1 - ah0) * plot;
    let y = |ar: f64| SIZE - MARGIN - (ar - ar0) / (ar1 - ar0) * plot;
    let cw = plot / (ah_values.len() - 1) as f64;
    let ch = plot / (ar_values.len() - 1) as f64;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" \
         viewBox=\"0 0 {SIZE} {SIZE}\">\n<rect width=\"{SIZE}\" height=\"{SIZE}\" \
         fill=\"white\"/>\n"
    ));
    for p in points {
        let color = ["#4878cf", "#6acc65", "#ee854a"][p.region.code() as usize];
        svg.push_str(&format!(
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{color}\"/>\n",
            x(p.a_h) - 0.5 * cw,
            y(p.a_r) - 0.5 * ch,
            cw,
            ch,
        ));
        if p.marginal {
            svg.push_str(&format!(
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"black\" \
                 fill-opacity=\"0.45\"/>\n",
                x(p.a_h) - 0.5 * cw,
                y(p.a_r) - 0.5 * ch,
                cw,
                ch,
            ));
        }
    }
    if fold.len() >= 2 {
        let pts: Vec<String> = fold
            .iter()
            .map(|&(ah, ar)| format!("{:.2},{:.2}", x(ah), y(ar)))
            .collect();
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\" \
             stroke-dasharray=\"6 4\"/>\n",
            pts.join(" ")
        ));
    }
    svg.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{plot}\" height=\"{plot}\" fill=\"none\" \
         stroke=\"black\" stroke-width=\"1\"/>\n"
    ));
    for (value, px, py, anchor) in [
        (ah0, x(ah0), SIZE - MARGIN + 16.0, "middle"),
        (ah1, x(ah1), SIZE - MARGIN + 16.0, "middle"),
        (ar0, MARGIN - 6.0, y(ar0), "end"),
        (ar1, MARGIN - 6.0, y(ar1) + 10.0, "end"),
    ] {
        svg.push_str(&format!(
            "<text x=\"{px:.2}\" y=\"{py:.2}\" font-size=\"13\" text-anchor=\"{anchor}\" \
             font-family=\"sans-serif\">{value}</text>\n"
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" \
         font-family=\"sans-serif\">candidate gain</text>\n",
        MARGIN + 0.5 * plot,
        SIZE - 8.0,
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{:.2}\" font-size=\"14\" text-anchor=\"middle\" \
         font-family=\"sans-serif\" transform=\"rotate(-90 14 {:.2})\">reset gain</text>\n",
        MARGIN + 0.5 * plot,
        MARGIN + 0.5 * plot,
    ));
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|e| CliError::Lib(Error::from(e)))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// radius-scaling
// ---------------------------------------------------------------------------

fn cmd_radius_scaling(
    args: &RadiusScalingArgs,
    cfg: &FileConfig,
    common: &Common,
) -> CliResult<i32> {
    let arch = args.arch.arch();
    let params = resolve_params(&args.params, cfg, arch, GainDefaults::Zero)?;
    let gate = match args.gate {
        Some(label) => parse_gate(&label.to_string())?,
        None => match arch {
            Arch::Gru => Gate::R,
            _ => Gate::I,
        },
    };
    if !params.arch.gates().contains(&gate) {
        return Err(usage(format!(
            "gate {} does not belong to a {} network",
            gate.label(),
            params.arch.name()
        )));
    }
    let values = args
        .values
        .clone()
        .unwrap_or_else(|| vec![10.0, 100.0, 1000.0]);
    if values.len() < 2 {
        return Err(usage("--values needs at least two gains for a slope"));
    }

    let points = radius_scaling_sweep(
        |v| params.with_gain(gate, v),
        &values,
        &common.seeds,
        &RunOpts::default(),
    )?;
    let pooled = pool_by_value(&points);
    let emp: Vec<f64> = pooled.iter().map(|p| p.1).collect();
    let theory: Vec<f64> = pooled.iter().map(|p| p.2).collect();
    let fit_measured = fit_loglog(&values, &emp)?;
    let fit_predicted = fit_loglog(&values, &theory)?;

    let csv_path = common.path(&format!("radius_scaling_{}_{}.csv", arch.name(), gate.label()));
    write_csv_rows(
        &csv_path,
        &["value", "seed", "radius_measured", "radius_predicted", "c_h", "stationary"],
        &points
            .iter()
            .map(|p| {
                vec![
                    p.value,
                    p.seed as f64,
                    p.radius_emp,
                    p.radius_theory,
                    p.c_h,
                    p.stationary as u8 as f64,
                ]
            })
            .collect::<Vec<_>>(),
    )?;
    note_written(&csv_path);

    let top = *values.last().unwrap();
    let top_c_h = {
        let tops: Vec<f64> = points
            .iter()
            .filter(|p| p.value == top)
            .map(|p| p.c_h)
            .collect();
        tops.iter().sum::<f64>() / tops.len() as f64
    };
    let report = json!({
        "run_config": common.run_config(&format!("radius-scaling ({})", arch.name()), Some(params)),
        "gate": gate.label().to_string(),
        "values": values,
        "pooled": pooled.iter().map(|&(v, e, t)| json!({
            "value": v, "radius_measured": e, "radius_predicted": t,
        })).collect::<Vec<_>>(),
        "fit_measured": fit_measured,
        "fit_predicted": fit_predicted,
        // Finite-size context: when only a handful of units sit inside the
        // swept gate's transition layer, the measured edge lags the
        // infinite-width radius (see the library docs on layer starvation).
        "top_gain_layer_units": transition_layer_units(params.n, top, top_c_h),
    });
    let report_path = common.path(&format!(
        "radius_scaling_{}_{}_report.json",
        arch.name(),
        gate.label()
    ));
    write_json(&report_path, &report)?;
    note_written(&report_path);
    Ok(0)
}

// ---------------------------------------------------------------------------
// cdf-accumulation
// ---------------------------------------------------------------------------

fn cmd_cdf_accumulation(
    args: &CdfAccumulationArgs,
    cfg: &FileConfig,
    common: &Common,
) -> CliResult<i32> {
    let arch = args.arch.arch();
    let params = resolve_params(&args.params, cfg, arch, GainDefaults::Zero)?;
    let leak = match arch {
        Arch::Gru => Gate::Z,
        _ => Gate::F,
    };
    let gains = args
        .gains
        .clone()
        .unwrap_or_else(|| vec![1.0, 2.0, 4.0, 8.0]);
    if gains.is_empty() {
        return Err(usage("--gains needs at least one value"));
    }
    if !(args.window > 0.0) {
        return Err(usage("--window must be positive"));
    }

    // Pool eigenvalues over seeds and over three well-separated snapshots
    // per run, then count the mass within the window around λ = 1.
    let mut cdf = Vec::with_capacity(gains.len());
    for &gain in &gains {
        let swept = params.with_gain(leak, gain);
        let mut cloud: Option<EigenCloud> = None;
        for &seed in &common.seeds {
            let net = sample_network(&swept, seed)?;
            let run = run_to_steady(&net, seed, &RunOpts::default())?;
            let len = run.snapshots.len();
            let mut picks = vec![len / 3, (2 * len) / 3, len - 1];
            picks.dedup();
            for idx in picks {
                let j = state_jacobian(&net, &run.snapshots[idx])?;
                let c = EigenCloud::from_jacobian(arch, &j)?;
                match cloud.as_mut() {
                    Some(acc) => acc.absorb(&c)?,
                    None => cloud = Some(c),
                }
            }
        }
        let cloud = cloud.expect("at least one snapshot per run");
        cdf.push(cdf_near_one(&cloud.values, args.window));
    }
    let fit = fit_cdf_erfc(&gains, &cdf)?;

    let csv_path = common.path(&format!("cdf_accumulation_{}.csv", arch.name()));
    write_csv_rows(
        &csv_path,
        &["gain", "cdf"],
        &gains
            .iter()
            .zip(&cdf)
            .map(|(&g, &c)| vec![g, c])
            .collect::<Vec<_>>(),
    )?;
    note_written(&csv_path);

    let report = json!({
        "run_config": common.run_config(&format!("cdf-accumulation ({})", arch.name()), Some(params)),
        "leak_gate": leak.label().to_string(),
        "window": args.window,
        "gains": gains,
        "cdf": cdf,
        "erfc_fit": fit,
    });
    let report_path = common.path(&format!("cdf_accumulation_{}_report.json", arch.name()));
    write_json(&report_path, &report)?;
    note_written(&report_path);
    Ok(0)
}

// ---------------------------------------------------------------------------
// fixed-points
// ---------------------------------------------------------------------------

fn cmd_fixed_points(
    args: &FixedPointsArgs,
    cfg: &FileConfig,
    common: &Common,
) -> CliResult<i32> {
    let params = resolve_params(&args.params, cfg, Arch::Gru, GainDefaults::Figure)?;
    let ar_values = args
        .ar_values
        .clone()
        .unwrap_or_else(|| vec![params.gain.r]);
    if ar_values.is_empty() {
        return Err(usage("--ar-values needs at least one gain"));
    }

    let mut rows = Vec::new();
    let mut table = Vec::new();
    for &a_r in &ar_values {
        let at = params.with_gain(Gate::R, a_r);
        let solutions = gru_fp_solve(&at)?;
        let region = classify(&at)?;
        for s in &solutions {
            rows.push(vec![
                a_r,
                s.branch as u8 as f64,
                s.c_h,
                s.c_y,
                s.rho0,
                s.stable as u8 as f64,
                s.residual,
            ]);
        }
        table.push(json!({
            "a_r": a_r,
            "region": region.label(),
            "solutions": solutions,
        }));
    }

    let csv_path = common.path("fixed_points.csv");
    write_csv_rows(
        &csv_path,
        &["a_r", "branch", "c_h", "c_y", "rho0", "stable", "residual"],
        &rows,
    )?;
    note_written(&csv_path);

    let report = json!({
        "run_config": common.run_config("fixed-points", Some(params)),
        "points": table,
    });
    let report_path = common.path("fixed_points_report.json");
    write_json(&report_path, &report)?;
    note_written(&report_path);
    Ok(0)
}

// ---------------------------------------------------------------------------
// gelfand
// ---------------------------------------------------------------------------

fn cmd_gelfand(args: &GelfandArgs, cfg: &FileConfig, common: &Common) -> CliResult<i32> {
    // GRU unless an LSTM gain flag makes the intent unambiguous.
    let arch = if args.params.af.is_some() || args.params.ai.is_some() || args.params.ao.is_some()
    {
        Arch::Lstm
    } else {
        Arch::Gru
    };
    let params = resolve_params(&args.params, cfg, arch, GainDefaults::Figure)?;
    if args.orders < 2 {
        return Err(usage("--orders must be at least 2"));
    }

    for &seed in &common.seeds {
        let slug = params.slug(seed);
        let net = sample_network(&params, seed)?;
        let j = if args.at_zero {
            match arch {
                Arch::Gru => jacobian_gru(&net, &GruState::initial(vec![0.0; params.n]))?,
                Arch::Lstm => jacobian_lstm(
                    &net,
                    &LstmState::initial(vec![0.0; params.n], vec![0.0; params.n]),
                )?,
                Arch::Vanilla => unreachable!("gelfand runs on gated architectures"),
            }
        } else {
            let run = run_to_steady(&net, seed, &RunOpts::default())?;
            state_jacobian(&net, run.final_state())?
        };
        let moments = norm_moment_sequence(&j, args.orders)?;
        let rates = growth_rates(&moments);
        let radius = EigenCloud::from_jacobian(arch, &j)?.radius();

        let csv_path = common.path(&format!("{slug}_gelfand.csv"));
        write_csv_rows(
            &csv_path,
            &["k", "norm_moment", "growth_rate"],
            &rates
                .iter()
                .enumerate()
                .map(|(i, &r)| vec![(i + 1) as f64, moments[i + 1], r])
                .collect::<Vec<_>>(),
        )?;
        note_written(&csv_path);

        let estimate = *rates.last().expect("orders >= 2 gives at least one rate");
        let report = json!({
            "run_config": common.run_config("gelfand", Some(params)),
            "seed": seed,
            "at_zero": args.at_zero,
            "orders": args.orders,
            "gelfand_estimate": estimate,
            "eig_radius": radius,
            "rel_gap": (estimate - radius).abs() / radius,
        });
        let report_path = common.path(&format!("{slug}_gelfand_report.json"));
        write_json(&report_path, &report)?;
        note_written(&report_path);
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// acceptance
// ---------------------------------------------------------------------------

fn cmd_acceptance(args: &AcceptanceArgs, cfg: &FileConfig, common: &Common) -> CliResult<i32> {
    let report = run_all(&AcceptanceOpts {
        n: args.n.or(cfg.n),
        only: args.only.clone(),
        seed_base: common.seeds[0],
    })?;
    for v in &report.verdicts {
        println!(
            "[{}] {:>2} {} — {} ({:.1} s)",
            if v.pass { "PASS" } else { "FAIL" },
            v.id,
            v.name,
            v.details,
            v.seconds
        );
    }
    println!(
        "{}/{} checks passed at n = {} in {:.1} s",
        report.verdicts.iter().filter(|v| v.pass).count(),
        report.verdicts.len(),
        report.n,
        report.total_seconds
    );
    let report_path = common.path("acceptance_report.json");
    write_json(&report_path, &report)?;
    note_written(&report_path);
    Ok(if report.all_pass { 0 } else { 1 })
}
