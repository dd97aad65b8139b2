//! `paramp` — command-line front end for the paramp-core library.
//!
//! Eight subcommands bind the library end to end: state construction,
//! amplification, pulse sampling, HBT click inference, witness
//! classification, boundary-curve tabulation, record analysis and source
//! brightness sweeps. Every randomized operation takes its seed from
//! `--seed` (default 0), never from the environment, so identical
//! invocations produce byte-identical outputs.
//!
//! Exit codes: 0 on success, 2 for invalid usage or malformed input,
//! 3 for physics domain errors (parameters outside the modeled regime).

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use paramp_core::error::{CoreError, Result};
use paramp_core::fock::PhotonNumberDistribution;
use paramp_core::hbt::{
    correct_loss_inferred, infer_probabilities, ClickStatistics, HbtConfig,
};
use paramp_core::opa::{
    amplified_mean, asymptotic_moments, intensity_distribution, sample_pulses, GainSetting,
    GridSpec,
};
use paramp_core::pipeline::{
    analyze, ingest_pulse_csv, sha256_hex, sweep_brightness, write_sweep_csv, AnalyzeOptions,
    SweepMode, SweepOptions,
};
use paramp_core::records::DEFAULT_RESAMPLES;
use paramp_core::states::{
    apply_loss, heralded_spdc, make_coherent, make_fock, make_thermal, make_vacuum,
    HeraldedSourceConfig, DEFAULT_ETA_IDLER,
};
use paramp_core::witness::{
    classify_moments, classify_probabilities, default_curve_span, sample_curve_span, CurveKind,
};

fn version_string() -> &'static str {
    static VERSION: std::sync::OnceLock<String> = std::sync::OnceLock::new();
    VERSION.get_or_init(|| {
        format!(
            "{} (NG-pre curve table: {} points over r in [0, {}], inversion tolerance {:.0e})",
            env!("CARGO_PKG_VERSION"),
            paramp_core::witness::NG_PRE_TABLE_POINTS,
            paramp_core::witness::NG_PRE_R_MAX,
            paramp_core::witness::INVERSION_TOL,
        )
    })
}

#[derive(Parser)]
#[command(
    name = "paramp",
    version = version_string(),
    about = "Photon-number statistics before and after phase-sensitive parametric amplification",
    propagate_version = true
)]
struct Cli {
    /// Seed for every randomized operation (no entropy from the environment).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Parametric gain G of the amplifier.
    #[arg(long, global = true, default_value_t = 6.5)]
    gain: f64,

    /// Output format; defaults per subcommand (tables emit csv, single
    /// documents emit json).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write the primary output to this path instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Construct a photon-number distribution (optionally behind a loss
    /// channel) and print it.
    SimulateState(SimulateStateArgs),
    /// Map a state through the high-gain amplifier: moment map by default,
    /// continuous intensity distribution with --intensity.
    Amplify(AmplifyArgs),
    /// Draw per-pulse intensity records of an amplified state.
    Sample(SampleArgs),
    /// Invert HBT click rates (Q1, Q2) into photon-number probabilities.
    HbtInfer(HbtInferArgs),
    /// Classify a measured point against the witness boundaries.
    Witness(WitnessArgs),
    /// Tabulate a named boundary curve.
    Curves(CurvesArgs),
    /// Analyze signal pulse records against an amplified-vacuum reference.
    Analyze(AnalyzeArgs),
    /// Sweep the heralded source brightness and classify every point.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StateKind {
    Vacuum,
    Fock,
    Thermal,
    Coherent,
    Heralded,
}

#[derive(clap::Args)]
struct SimulateStateArgs {
    /// Input state family.
    #[arg(long, value_enum)]
    kind: StateKind,

    /// Fock order (kind fock).
    #[arg(long, default_value_t = 1)]
    n: usize,

    /// Mean photon number (kinds thermal and coherent).
    #[arg(long)]
    mean: Option<f64>,

    /// Mean pair number per pulse (kind heralded).
    #[arg(long)]
    brightness: Option<f64>,

    /// Signal-arm transmittance of the heralded source.
    #[arg(long, default_value_t = 1.0)]
    eta_signal: f64,

    /// Idler-arm (herald) detection efficiency of the heralded source.
    #[arg(long, default_value_t = DEFAULT_ETA_IDLER)]
    eta_idler: f64,

    /// Heralded source config as a JSON file {mean_pairs, eta_signal,
    /// eta_idler}; overrides the individual flags.
    #[arg(long)]
    herald_config: Option<PathBuf>,

    /// Apply a binomial loss channel of this transmittance afterwards.
    #[arg(long)]
    loss: Option<f64>,
}

#[derive(clap::Args)]
struct AmplifyArgs {
    /// State JSON file, e.g. the output of simulate-state.
    #[arg(long)]
    input: PathBuf,

    /// Emit the continuous post-amplification intensity distribution
    /// instead of the moment map.
    #[arg(long)]
    intensity: bool,

    /// Lower edge of the intensity grid (with --intensity).
    #[arg(long)]
    grid_lo: Option<f64>,

    /// Upper edge of the intensity grid (with --intensity).
    #[arg(long)]
    grid_hi: Option<f64>,

    /// Number of intensity grid points (with --intensity).
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(clap::Args)]
struct SampleArgs {
    /// State JSON file, e.g. the output of simulate-state.
    #[arg(long)]
    input: PathBuf,

    /// Number of pulses to draw.
    #[arg(long)]
    pulses: usize,

    /// Deterministic detection scale in (0, 1] applied to every intensity.
    #[arg(long, default_value_t = 1.0)]
    detection_scale: f64,
}

#[derive(clap::Args)]
struct HbtInferArgs {
    /// Measured single-click rate (exactly one detector fired).
    #[arg(long)]
    q1: f64,

    /// Measured double-click rate (both detectors fired).
    #[arg(long)]
    q2: f64,

    /// Splitter transmittance toward detector A.
    #[arg(long, default_value_t = 0.5)]
    t: f64,

    /// Detection efficiency of detector A.
    #[arg(long, default_value_t = 1.0)]
    pa: f64,

    /// Detection efficiency of detector B.
    #[arg(long, default_value_t = 1.0)]
    pb: f64,

    /// Pulses behind the rates; enables binomial counting uncertainties.
    #[arg(long)]
    n_pulses: Option<u64>,

    /// Accidental single-click rate to subtract before inverting.
    #[arg(long, default_value_t = 0.0)]
    accidental_q1: f64,

    /// Accidental double-click rate to subtract before inverting.
    #[arg(long, default_value_t = 0.0)]
    accidental_q2: f64,

    /// Undo a known pre-splitter transmittance after inversion.
    #[arg(long)]
    correct_loss: Option<f64>,
}

#[derive(clap::Args)]
struct WitnessArgs {
    /// Mean photon number relative to amplified vacuum (moment plane).
    #[arg(long, requires = "g2", conflicts_with_all = ["p0", "p1"])]
    mu_rel: Option<f64>,

    /// Measured post-amplification g² (moment plane).
    #[arg(long, requires = "mu_rel")]
    g2: Option<f64>,

    /// 1σ uncertainty on mu-rel.
    #[arg(long, default_value_t = 0.0)]
    sigma_mu: f64,

    /// 1σ uncertainty on g2.
    #[arg(long, default_value_t = 0.0)]
    sigma_g2: f64,

    /// Vacuum probability (probability plane).
    #[arg(long, requires = "p1")]
    p0: Option<f64>,

    /// Single-photon probability (probability plane).
    #[arg(long, requires = "p0")]
    p1: Option<f64>,

    /// 1σ uncertainty on p0.
    #[arg(long, default_value_t = 0.0)]
    sigma_p0: f64,

    /// 1σ uncertainty on p1.
    #[arg(long, default_value_t = 0.0)]
    sigma_p1: f64,
}

#[derive(clap::Args)]
struct CurvesArgs {
    /// Curve name: NG_pre_p0p1, NC_pre_p0p1, NG_post_mu_g2, NC_post_mu_g2,
    /// Floor_post_mu_g2, NG_pre_moments or NC_pre_moments (short aliases
    /// NG_pre, NC_pre, NG_post, NC_post, Floor_post, NG_moments,
    /// NC_moments).
    #[arg(long)]
    kind: String,

    /// Number of sampled points.
    #[arg(long, default_value_t = 1000)]
    points: usize,

    /// Lower end of the curve parameter (r, p0 or m depending on kind).
    #[arg(long, visible_alias = "r-min")]
    param_min: Option<f64>,

    /// Upper end of the curve parameter (r, p0 or m depending on kind).
    #[arg(long, visible_alias = "r-max")]
    param_max: Option<f64>,
}

#[derive(clap::Args)]
struct AnalyzeArgs {
    /// Signal pulse-record CSV (as written by sample).
    #[arg(long)]
    signal: PathBuf,

    /// Amplified-vacuum reference pulse-record CSV.
    #[arg(long)]
    vacuum: PathBuf,

    /// Bootstrap resamples for the confidence intervals.
    #[arg(long, default_value_t = DEFAULT_RESAMPLES)]
    resamples: usize,

    /// Use every pulse instead of conditioning on the herald column.
    #[arg(long)]
    unconditioned: bool,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// Comma-separated brightness (mean pairs per pulse) values.
    #[arg(long, value_delimiter = ',', required = true)]
    brightness: Vec<f64>,

    /// Signal-arm transmittance of the heralded source.
    #[arg(long, default_value_t = 0.51)]
    eta_signal: f64,

    /// Idler-arm (herald) detection efficiency of the heralded source.
    #[arg(long, default_value_t = DEFAULT_ETA_IDLER)]
    eta_idler: f64,

    /// Extra transmittance between the source and the amplifier.
    #[arg(long, default_value_t = 1.0)]
    extra_loss: f64,

    /// Moment evaluation: analytic (closed form) or monte-carlo (sampled).
    #[arg(long, default_value = "analytic")]
    mode: String,

    /// Pulses per point in monte-carlo mode.
    #[arg(long, default_value_t = 35_000)]
    pulses: usize,

    /// Bootstrap resamples per point in monte-carlo mode.
    #[arg(long, default_value_t = 200)]
    resamples: usize,
}

/// A state document: the distribution plus, for heralded sources, the
/// herald (click) probability per pulse.
#[derive(Serialize)]
struct StateDoc {
    probs: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    herald_prob: Option<f64>,
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::from(if e.is_domain() { 3 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let out = Output { path: cli.output.clone() };
    let gain = || GainSetting::new(cli.gain);
    match &cli.command {
        Command::SimulateState(args) => {
            let (dist, herald_prob) = build_state(args)?;
            let dist = match args.loss {
                Some(eta) => apply_loss(&dist, eta)?,
                None => dist,
            };
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => out.json(&StateDoc { probs: dist.probs.clone(), herald_prob }),
                Format::Csv => {
                    let mut text = String::from("n,probability\n");
                    for (n, p) in dist.probs.iter().enumerate() {
                        text.push_str(&format!("{n},{p}\n"));
                    }
                    out.text(&text)
                }
            }
        }
        Command::Amplify(args) => {
            let dist = read_state(&args.input)?;
            if args.intensity {
                let spec = GridSpec {
                    n_lo: args.grid_lo,
                    n_hi: args.grid_hi,
                    points: args.grid_points,
                };
                let intensity = intensity_distribution(&dist, gain()?, spec)?;
                match cli.format.unwrap_or(Format::Csv) {
                    Format::Csv => {
                        let mut buf = Vec::new();
                        intensity.write_csv(&mut buf)?;
                        out.bytes(&buf)
                    }
                    Format::Json => out.json(&intensity),
                }
            } else {
                let ms = dist.moments()?;
                let am = asymptotic_moments(&ms);
                #[derive(Serialize)]
                struct AmplifyDoc {
                    gain: f64,
                    mu_rel: f64,
                    sigma2_rel: f64,
                    g2_post: f64,
                    /// Exact (not asymptotic) output mean photon number.
                    mean_photons: f64,
                }
                let doc = AmplifyDoc {
                    gain: cli.gain,
                    mu_rel: am.mu_rel,
                    sigma2_rel: am.sigma2_rel,
                    g2_post: am.g2_post,
                    mean_photons: amplified_mean(ms.m, gain()?)?,
                };
                match cli.format.unwrap_or(Format::Json) {
                    Format::Json => out.json(&doc),
                    Format::Csv => out.text(&format!(
                        "gain,mu_rel,sigma2_rel,g2_post,mean_photons\n{},{},{},{},{}\n",
                        doc.gain, doc.mu_rel, doc.sigma2_rel, doc.g2_post, doc.mean_photons
                    )),
                }
            }
        }
        Command::Sample(args) => {
            let dist = read_state(&args.input)?;
            let mut rec =
                sample_pulses(&dist, gain()?, args.pulses, args.detection_scale, cli.seed)?;
            rec.meta.insert("gain".into(), format!("{}", cli.gain));
            rec.meta.insert("seed".into(), format!("{}", cli.seed));
            rec.meta.insert("detection_scale".into(), format!("{}", args.detection_scale));
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut buf = Vec::new();
                    rec.write_csv(&mut buf)?;
                    out.bytes(&buf)
                }
                Format::Json => out.json(&rec),
            }
        }
        Command::HbtInfer(args) => {
            let mut stats = ClickStatistics::from_rates(args.q1, args.q2)?;
            stats.n_pulses = args.n_pulses;
            if args.accidental_q1 != 0.0 || args.accidental_q2 != 0.0 {
                stats = stats.subtract_accidentals(args.accidental_q1, args.accidental_q2)?;
            }
            let cfg = HbtConfig::new(args.t, args.pa, args.pb)?;
            let mut inf = infer_probabilities(&stats, &cfg)?;
            if let Some(eta) = args.correct_loss {
                inf = correct_loss_inferred(&inf, eta)?;
            }
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => out.json(&inf),
                Format::Csv => out.text(&format!(
                    "p0,p1,p2plus,sigma_p0,sigma_p1,sigma_p2plus,physical\n{},{},{},{},{},{},{}\n",
                    inf.p0, inf.p1, inf.p2plus, inf.sigma_p0, inf.sigma_p1, inf.sigma_p2plus,
                    inf.physical
                )),
            }
        }
        Command::Witness(args) => {
            let verdict = match (args.mu_rel, args.g2, args.p0, args.p1) {
                (Some(mu), Some(g2), None, None) => {
                    classify_moments(mu, g2, args.sigma_mu, args.sigma_g2)?
                }
                (None, None, Some(p0), Some(p1)) => {
                    classify_probabilities(p0, p1, args.sigma_p0, args.sigma_p1)?
                }
                _ => {
                    return Err(CoreError::invalid(
                        "witness needs either --mu-rel with --g2 (moment plane) or --p0 with \
                         --p1 (probability plane)",
                    ))
                }
            };
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => out.json(&verdict),
                Format::Csv => {
                    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                    out.text(&format!(
                        "category,margin_non_gaussian,margin_non_classical,margin_floor,margin_physical\n{:?},{},{},{},{}\n",
                        verdict.category,
                        opt(verdict.margins.non_gaussian),
                        opt(verdict.margins.non_classical),
                        opt(verdict.margins.floor),
                        opt(verdict.margins.physical),
                    ))
                }
            }
        }
        Command::Curves(args) => {
            let kind: CurveKind = args.kind.parse()?;
            let (lo, hi) = default_curve_span(kind);
            let curve = sample_curve_span(
                kind,
                args.points,
                args.param_min.unwrap_or(lo),
                args.param_max.unwrap_or(hi),
            )?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut buf = Vec::new();
                    curve.write_csv(&mut buf)?;
                    out.bytes(&buf)
                }
                Format::Json => out.json(&curve),
            }
        }
        Command::Analyze(args) => {
            if cli.format == Some(Format::Csv) {
                return Err(CoreError::invalid(
                    "analyze emits a structured JSON report; --format csv is not supported here",
                ));
            }
            let signal = ingest_pulse_csv(&args.signal)?;
            let vacuum = ingest_pulse_csv(&args.vacuum)?;
            let opts = AnalyzeOptions {
                seed: cli.seed,
                resamples: args.resamples,
                unconditioned: args.unconditioned,
            };
            let mut report = analyze(&signal, &vacuum, &opts)?;
            report.inputs.signal_sha256 = Some(sha256_hex(&args.signal)?);
            report.inputs.vacuum_sha256 = Some(sha256_hex(&args.vacuum)?);
            out.text(&(report.to_json()? + "\n"))
        }
        Command::Sweep(args) => {
            let cfg = HeraldedSourceConfig {
                mean_pairs: args.brightness[0],
                eta_signal: args.eta_signal,
                eta_idler: args.eta_idler,
            };
            let opts = SweepOptions {
                mode: args.mode.parse::<SweepMode>()?,
                gain: gain()?,
                extra_loss: args.extra_loss,
                n_pulses: args.pulses,
                seed: cli.seed,
                resamples: args.resamples,
            };
            let rows = sweep_brightness(&cfg, &args.brightness, &opts)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_sweep_csv(&rows, &mut buf)?;
                    out.bytes(&buf)
                }
                Format::Json => out.json(&rows),
            }
        }
    }
}

fn build_state(args: &SimulateStateArgs) -> Result<(PhotonNumberDistribution, Option<f64>)> {
    let need_mean = |ctx: &str| {
        args.mean.ok_or_else(|| {
            CoreError::invalid(format!("--mean is required for --kind {ctx}"))
        })
    };
    match args.kind {
        StateKind::Vacuum => Ok((make_vacuum(), None)),
        StateKind::Fock => Ok((make_fock(args.n)?, None)),
        StateKind::Thermal => Ok((make_thermal(need_mean("thermal")?)?, None)),
        StateKind::Coherent => Ok((make_coherent(need_mean("coherent")?)?, None)),
        StateKind::Heralded => {
            let cfg = match &args.herald_config {
                Some(path) => HeraldedSourceConfig::from_json(&std::fs::read_to_string(path)?)?,
                None => HeraldedSourceConfig {
                    mean_pairs: args.brightness.ok_or_else(|| {
                        CoreError::invalid("--brightness is required for --kind heralded")
                    })?,
                    eta_signal: args.eta_signal,
                    eta_idler: args.eta_idler,
                },
            };
            let (dist, herald_prob) = heralded_spdc(&cfg)?;
            Ok((dist, Some(herald_prob)))
        }
    }
}

fn read_state(path: &PathBuf) -> Result<PhotonNumberDistribution> {
    let dist = PhotonNumberDistribution::from_json(&std::fs::read_to_string(path)?)?;
    dist.require_valid()?;
    Ok(dist)
}

struct Output {
    path: Option<PathBuf>,
}

impl Output {
    fn bytes(&self, data: &[u8]) -> Result<()> {
        use std::io::Write as _;
        match &self.path {
            Some(p) => std::fs::write(p, data)?,
            None => std::io::stdout().write_all(data)?,
        }
        Ok(())
    }

    fn text(&self, text: &str) -> Result<()> {
        self.bytes(text.as_bytes())
    }

    fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        self.text(&(text + "\n"))
    }
}
