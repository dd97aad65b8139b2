//! End-to-end analysis: ingest pulse records, normalize by an
//! amplified-vacuum reference, estimate (μ_rel, g²) with bootstrap
//! uncertainties, classify against the witness boundaries, and generate
//! brightness-sweep and pre-amplification comparison tables.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CoreError, Result};
use crate::fock::PhotonNumberDistribution;
use crate::math::{derive_seed, seed_domain};
use crate::opa::{asymptotic_moments, sample_pulses, GainSetting};
use crate::records::{
    estimate_moments, percentile, sample_stats, PulseRecordSet, DEFAULT_RESAMPLES,
};
use crate::states::{apply_loss, heralded_spdc, make_vacuum, HeraldedSourceConfig};
use crate::witness::{
    classify_moments, classify_probabilities, floor_post, nc_bound_post, ng_bound_post,
    VerdictCategory, WitnessVerdict,
};

/// Version tag embedded in every [`AnalysisReport`].
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// A point estimate with its 68% central bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCi {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl EstimateWithCi {
    /// Half-width of the interval, used as the 1σ input to classifiers.
    pub fn sigma(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }
}

/// The witness thresholds evaluated at the measured μ_rel, recorded so the
/// verdict can be audited without recomputing the boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySamples {
    pub non_gaussian: f64,
    pub non_classical: f64,
    /// `None` for μ_rel ≥ 5, where the floor is not defined.
    pub floor: Option<f64>,
}

/// Provenance block: everything needed to reproduce the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the signal CSV, when the data came from a file.
    pub signal_sha256: Option<String>,
    /// SHA-256 of the vacuum-reference CSV, when it came from a file.
    pub vacuum_sha256: Option<String>,
    pub seed: u64,
    pub resamples: usize,
    /// Gain recorded in the signal metadata, if present.
    pub gain: Option<f64>,
    /// Pulses actually analyzed (after any herald conditioning).
    pub n_signal_pulses: usize,
    pub n_vacuum_pulses: usize,
    /// Whether herald conditioning was applied to the signal set.
    pub conditioned: bool,
}

/// Full output of [`analyze`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub mu_rel: EstimateWithCi,
    pub g2: EstimateWithCi,
    pub verdict: WitnessVerdict,
    pub boundary_samples: BoundarySamples,
    pub inputs: Provenance,
    /// How the intervals were obtained (they substitute for error bars
    /// whose construction is not standardized).
    pub uncertainty_method: String,
}

impl AnalysisReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<AnalysisReport> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Options for [`analyze`].
#[derive(Debug, Clone, Copy)]
pub struct AnalyzeOptions {
    pub seed: u64,
    pub resamples: usize,
    /// Ignore the herald column instead of conditioning on it.
    pub unconditioned: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { seed: 0, resamples: DEFAULT_RESAMPLES, unconditioned: false }
    }
}

/// Read a pulse-record CSV from disk.
pub fn ingest_pulse_csv(path: impl AsRef<Path>) -> Result<PulseRecordSet> {
    PulseRecordSet::read_csv_path(path)
}

/// Hex SHA-256 of a file, for report provenance.
pub fn sha256_hex(path: impl AsRef<Path>) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

fn mean_of(counts: &[f64]) -> f64 {
    counts.iter().sum::<f64>() / counts.len() as f64
}

/// Estimate (μ_rel, g²) of a signal set against an amplified-vacuum
/// reference and classify the point.
///
/// μ_rel is the ratio of sample means; g² comes from the signal sample
/// moments. Intervals are 68% central percentile intervals from a joint
/// bootstrap: each resample redraws both sets with its own derived ChaCha
/// stream, so signal/vacuum correlations of derived quantities are
/// propagated. The signal set is herald-conditioned first unless
/// `unconditioned` is set; the vacuum reference is always used as-is.
///
/// The verdict is `classify_moments` at the point estimates with the CI
/// half-widths as σ; a measured μ_rel < 1 is rejected as a domain error
/// (no phase-independent input can reach it).
pub fn analyze(
    signal: &PulseRecordSet,
    vacuum_ref: &PulseRecordSet,
    opts: &AnalyzeOptions,
) -> Result<AnalysisReport> {
    signal.validate()?;
    vacuum_ref.validate()?;
    let conditioned = !opts.unconditioned && signal.herald.is_some();
    let sig = if opts.unconditioned { signal.unconditioned() } else { signal.conditioned() };
    if sig.len() < 2 || vacuum_ref.len() < 2 {
        return Err(CoreError::Estimation(format!(
            "need at least 2 pulses in each set, got {} signal and {} vacuum",
            sig.len(),
            vacuum_ref.len()
        )));
    }
    if opts.resamples < 2 {
        return Err(CoreError::Estimation(format!(
            "need at least 2 bootstrap resamples, got {}",
            opts.resamples
        )));
    }
    let Some((mean_s, _, g2_point)) = sample_stats(&sig.counts) else {
        return Err(CoreError::Estimation(
            "signal set has zero mean intensity; g² is undefined".into(),
        ));
    };
    let mean_v = mean_of(&vacuum_ref.counts);
    if !(mean_v > 0.0) {
        return Err(CoreError::Estimation(
            "vacuum reference has zero mean; cannot normalize".into(),
        ));
    }
    let mu_point = mean_s / mean_v;

    // joint bootstrap: one stream per resample covers both sets
    let (ns, nv) = (sig.counts.len(), vacuum_ref.counts.len());
    let pairs: Vec<(f64, f64)> = (0..opts.resamples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, i, seed_domain::BOOTSTRAP));
            let mut draw = Vec::with_capacity(ns);
            for _ in 0..ns {
                draw.push(sig.counts[rng.gen_range(0..ns)]);
            }
            let s = sample_stats(&draw);
            let mut vsum = 0.0;
            for _ in 0..nv {
                vsum += vacuum_ref.counts[rng.gen_range(0..nv)];
            }
            let vmean = vsum / nv as f64;
            match s {
                Some((smean, _, sg2)) if vmean > 0.0 => (smean / vmean, sg2),
                _ => (f64::NAN, f64::NAN),
            }
        })
        .collect();

    let interval = |pick: fn(&(f64, f64)) -> f64, value: f64| -> EstimateWithCi {
        let mut xs: Vec<f64> = pairs.iter().map(pick).filter(|v| v.is_finite()).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        EstimateWithCi { value, ci_low: percentile(&xs, 0.16), ci_high: percentile(&xs, 0.84) }
    };
    let mu_rel = interval(|p| p.0, mu_point);
    let g2 = interval(|p| p.1, g2_point);

    let verdict = classify_moments(mu_point, g2_point, mu_rel.sigma(), g2.sigma())?;
    let boundary_samples = BoundarySamples {
        non_gaussian: ng_bound_post(mu_point)?,
        non_classical: nc_bound_post(mu_point)?,
        floor: if mu_point < 5.0 { Some(floor_post(mu_point)?) } else { None },
    };

    Ok(AnalysisReport {
        schema_version: REPORT_SCHEMA_VERSION,
        mu_rel,
        g2,
        verdict,
        boundary_samples,
        inputs: Provenance {
            signal_sha256: None,
            vacuum_sha256: None,
            seed: opts.seed,
            resamples: opts.resamples,
            gain: signal.meta.get("gain").and_then(|g| g.parse().ok()),
            n_signal_pulses: ns,
            n_vacuum_pulses: nv,
            conditioned,
        },
        uncertainty_method: format!(
            "joint bootstrap, {} resamples, 68% central percentile intervals",
            opts.resamples
        ),
    })
}

/// How a brightness sweep evaluates each point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepMode {
    /// Closed-form moments through the asymptotic map.
    Analytic,
    /// Per-pulse simulation at the configured gain.
    MonteCarlo,
}

impl std::str::FromStr for SweepMode {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "analytic" => Ok(SweepMode::Analytic),
            "monte_carlo" | "monte-carlo" | "mc" => Ok(SweepMode::MonteCarlo),
            other => Err(CoreError::invalid(format!(
                "unknown sweep mode {other:?}; expected analytic or monte_carlo"
            ))),
        }
    }
}

/// One brightness point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub brightness: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2plus: f64,
    pub m: f64,
    pub s2: f64,
    pub mu_rel: f64,
    pub g2: f64,
    /// Zero in analytic mode; bootstrap half-widths in Monte-Carlo mode.
    pub sigma_mu_rel: f64,
    pub sigma_g2: f64,
    pub prob_verdict: VerdictCategory,
    pub moment_verdict: VerdictCategory,
}

/// Options for [`sweep_brightness`].
#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub mode: SweepMode,
    pub gain: GainSetting,
    /// Extra transmittance applied after the source (pre-amplifier optics),
    /// in (0, 1].
    pub extra_loss: f64,
    /// Pulses per point in Monte-Carlo mode.
    pub n_pulses: usize,
    pub seed: u64,
    /// Bootstrap resamples per point in Monte-Carlo mode.
    pub resamples: usize,
}

/// Evaluate the heralded source across a brightness (mean pairs per pulse)
/// list: per point, the lossy heralded photon statistics, the
/// post-amplification moments (analytic or sampled), and both witness
/// verdicts. Points run in parallel with per-point derived seeds.
pub fn sweep_brightness(
    cfg_base: &HeraldedSourceConfig,
    brightness_list: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<SweepRow>> {
    if brightness_list.is_empty() {
        return Err(CoreError::invalid("brightness list must not be empty"));
    }
    if !(opts.extra_loss > 0.0 && opts.extra_loss <= 1.0) {
        return Err(CoreError::domain(format!(
            "extra_loss must be a transmittance in (0, 1], got {}",
            opts.extra_loss
        )));
    }

    brightness_list
        .par_iter()
        .enumerate()
        .map(|(idx, &brightness)| {
            let cfg = HeraldedSourceConfig {
                mean_pairs: brightness,
                eta_signal: cfg_base.eta_signal,
                eta_idler: cfg_base.eta_idler,
            };
            cfg.validate()?;
            let (dist, _herald_prob) = heralded_spdc(&cfg)?;
            let lossy = apply_loss(&dist, opts.extra_loss)?;
            let ms = lossy.moments()?;
            let (p0, p1, p2plus) = (lossy.p0(), lossy.p1(), lossy.p2_plus());
            let prob_verdict = classify_probabilities(
                p0.clamp(0.0, 1.0),
                p1.clamp(0.0, 1.0),
                0.0,
                0.0,
            )?
            .category;

            let (mu_rel, g2, sigma_mu, sigma_g2) = match opts.mode {
                SweepMode::Analytic => {
                    let am = asymptotic_moments(&ms);
                    (am.mu_rel, am.g2_post, 0.0, 0.0)
                }
                SweepMode::MonteCarlo => {
                    let sig_seed = derive_seed(opts.seed, 2 * idx as u64, seed_domain::SWEEP);
                    let vac_seed = derive_seed(opts.seed, 2 * idx as u64 + 1, seed_domain::SWEEP);
                    let sig = sample_pulses(&lossy, opts.gain, opts.n_pulses, 1.0, sig_seed)?;
                    let vac =
                        sample_pulses(&make_vacuum(), opts.gain, opts.n_pulses, 1.0, vac_seed)?;
                    let sig_est = estimate_moments(&sig, sig_seed, opts.resamples)?;
                    let vac_est = estimate_moments(&vac, vac_seed, opts.resamples)?;
                    let mu_rel = sig_est.mean / vac_est.mean;
                    let rel_s = (sig_est.mean_ci.1 - sig_est.mean_ci.0) / (2.0 * sig_est.mean);
                    let rel_v = (vac_est.mean_ci.1 - vac_est.mean_ci.0) / (2.0 * vac_est.mean);
                    let sigma_mu = mu_rel * rel_s.hypot(rel_v);
                    (mu_rel, sig_est.g2, sigma_mu, sig_est.g2_sigma())
                }
            };
            let moment_verdict = classify_moments(mu_rel, g2, sigma_mu, sigma_g2)?.category;

            Ok(SweepRow {
                brightness,
                p0,
                p1,
                p2plus,
                m: ms.m,
                s2: ms.s2,
                mu_rel,
                g2,
                sigma_mu_rel: sigma_mu,
                sigma_g2,
                prob_verdict,
                moment_verdict,
            })
        })
        .collect()
}

/// Write sweep rows as CSV.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(
        w,
        "brightness,p0,p1,p2plus,m,s2,mu_rel,g2,sigma_mu_rel,sigma_g2,prob_verdict,moment_verdict"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.brightness,
            r.p0,
            r.p1,
            r.p2plus,
            r.m,
            r.s2,
            r.mu_rel,
            r.g2,
            r.sigma_mu_rel,
            r.sigma_g2,
            r.prob_verdict,
            r.moment_verdict
        )?;
    }
    Ok(())
}

/// Where a pre-amplification comparison row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PreampSource {
    /// Inverted from a post-amplification (μ_rel, g²) point.
    PostAmplification,
    /// Computed from loss-corrected (p0, p1, p2plus) probabilities.
    Probabilities,
}

impl std::fmt::Display for PreampSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PreampSource::PostAmplification => "post",
            PreampSource::Probabilities => "prob",
        })
    }
}

/// One (m, s²) point of the pre-amplification comparison table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreampRow {
    pub source: PreampSource,
    pub m: f64,
    pub s2: f64,
    /// Set when the inversion produced s² < 0 beyond tolerance (the input
    /// point is inconsistent with any phase-independent state).
    pub flagged: bool,
}

const PREAMP_S2_TOL: f64 = 1e-9;

/// Convert measurement points to pre-amplification (m, s²) pairs for
/// overlay against the moment-plane boundaries.
///
/// Post-amplification points invert the asymptotic map exactly:
/// `m = (μ_rel − 1)/2`, `s² = ((g² − 1) μ_rel²/2 − 1 − m − m²)/3`.
/// Probability points are first rescaled by the known transmittance `eta`
/// (exact on {0,1,2} support) and then reduced to moments, treating the
/// 2-plus bucket as exactly two photons.
pub fn preamp_comparison(
    points_post: &[(f64, f64)],
    points_prob: &[(f64, f64, f64)],
    eta: f64,
) -> Result<Vec<PreampRow>> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(CoreError::domain(format!(
            "eta must be a transmittance in (0, 1], got {eta}"
        )));
    }
    let mut rows = Vec::with_capacity(points_post.len() + points_prob.len());
    for &(mu_rel, g2) in points_post {
        if !(mu_rel >= 1.0) {
            return Err(CoreError::domain(format!(
                "mu_rel must be >= 1, got {mu_rel}"
            )));
        }
        let m = (mu_rel - 1.0) / 2.0;
        let s2 = ((g2 - 1.0) * mu_rel * mu_rel / 2.0 - 1.0 - m - m * m) / 3.0;
        rows.push(PreampRow {
            source: PreampSource::PostAmplification,
            m,
            s2,
            flagged: s2 < -PREAMP_S2_TOL,
        });
    }
    for &(p0, p1, p2plus) in points_prob {
        let (_c0, c1, c2) = crate::hbt::correct_loss(p0, p1, p2plus, eta)?;
        let m = c1 + 2.0 * c2;
        let s2 = (c1 + 4.0 * c2) - m * m;
        rows.push(PreampRow {
            source: PreampSource::Probabilities,
            m,
            s2,
            flagged: s2 < -PREAMP_S2_TOL,
        });
    }
    Ok(rows)
}

/// Write pre-amplification comparison rows as CSV.
pub fn write_preamp_csv<W: Write>(rows: &[PreampRow], mut w: W) -> Result<()> {
    writeln!(w, "source,m,s2,flagged")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.source, r.m, r.s2, r.flagged)?;
    }
    Ok(())
}

/// Convenience constructor used by simulation front ends: an amplified
/// sample of a photon-number distribution plus a matched vacuum reference.
pub fn simulate_signal_and_vacuum(
    dist: &PhotonNumberDistribution,
    gain: GainSetting,
    n_pulses: usize,
    seed: u64,
) -> Result<(PulseRecordSet, PulseRecordSet)> {
    let sig = sample_pulses(dist, gain, n_pulses, 1.0, seed)?;
    let vac = sample_pulses(&make_vacuum(), gain, n_pulses, 1.0, seed.wrapping_add(1))?;
    Ok((sig, vac))
}
