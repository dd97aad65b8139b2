//! Hanbury Brown–Twiss (HBT) click statistics: a forward Monte-Carlo
//! simulator of the splitter + two threshold detectors, the inverse map
//! from click rates to photon-number probabilities, loss correction, and
//! heralding-efficiency arithmetic.
//!
//! With `a = T·pA` and `b = R·pB` (per-photon probabilities of producing a
//! click on each arm), exact threshold-detector enumeration gives
//!
//! ```text
//! Q1 = Σ pₙ [ (1−a)ⁿ + (1−b)ⁿ − 2(1−a−b)ⁿ ]   (exactly one click)
//! Q2 = Σ pₙ [ 1 − (1−a)ⁿ − (1−b)ⁿ + (1−a−b)ⁿ ] (both click)
//! ```
//!
//! and dropping n ≥ 3 terms these invert to the estimators implemented by
//! [`infer_probabilities`]. `Q1` counts *exactly* one click — that is the
//! convention under which the inversion is self-consistent, which the
//! simulator round-trip tests verify.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::fock::PhotonNumberDistribution;
use crate::math::{derive_seed, seed_domain};

/// Pulses per deterministic parallel chunk.
const CHUNK: usize = 4096;

/// Splitter transmittance and detector efficiencies of an HBT setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HbtConfig {
    t: f64,
    p_a: f64,
    p_b: f64,
    accidental_overlap: f64,
}

impl HbtConfig {
    /// Validate and build: `T ∈ (0,1)`, `pA, pB ∈ (0,1]`.
    pub fn new(t: f64, p_a: f64, p_b: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(CoreError::invalid(format!(
                "transmittance T must be in (0, 1), got {t}"
            )));
        }
        for (name, p) in [("pA", p_a), ("pB", p_b)] {
            if !(p > 0.0 && p <= 1.0) {
                return Err(CoreError::invalid(format!(
                    "detector efficiency {name} must be in (0, 1], got {p}"
                )));
            }
        }
        Ok(HbtConfig { t, p_a, p_b, accidental_overlap: 0.0 })
    }

    /// Enable accidental-coincidence simulation: with this probability per
    /// pulse, an uncorrelated extra draw from the source spills into the
    /// detection window (neighboring-pulse overlap). The inference formulas
    /// assume accidentals have been subtracted, so this is off by default.
    pub fn with_accidental_overlap(mut self, overlap: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&overlap) {
            return Err(CoreError::invalid(format!(
                "accidental overlap must be in [0, 1], got {overlap}"
            )));
        }
        self.accidental_overlap = overlap;
        Ok(self)
    }

    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn r(&self) -> f64 {
        1.0 - self.t
    }
    pub fn p_a(&self) -> f64 {
        self.p_a
    }
    pub fn p_b(&self) -> f64 {
        self.p_b
    }
    pub fn q_a(&self) -> f64 {
        1.0 - self.p_a
    }
    pub fn q_b(&self) -> f64 {
        1.0 - self.p_b
    }
    pub fn accidental_overlap(&self) -> f64 {
        self.accidental_overlap
    }
}

/// Raw per-outcome tallies from a simulated run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickCounts {
    pub none: u64,
    pub single: u64,
    pub double: u64,
}

/// Per-pulse click rates: `q1` (exactly one detector fired) and `q2`
/// (both fired), with raw counts when they came from a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClickStatistics {
    pub q1: f64,
    pub q2: f64,
    /// Number of pulses behind the rates; `None` when the rates were
    /// supplied directly (uncertainties are then unavailable).
    pub n_pulses: Option<u64>,
    pub counts: Option<ClickCounts>,
}

impl ClickStatistics {
    /// Build from externally measured rates (no pulse count, so downstream
    /// physicality checks are exact rather than statistical).
    pub fn from_rates(q1: f64, q2: f64) -> Result<Self> {
        for (name, q) in [("Q1", q1), ("Q2", q2)] {
            if !q.is_finite() || !(0.0..=1.0).contains(&q) {
                return Err(CoreError::invalid(format!("{name} must be in [0, 1], got {q}")));
            }
        }
        if q1 + q2 > 1.0 + 1e-12 {
            return Err(CoreError::invalid(format!(
                "Q1 + Q2 must be <= 1, got {q1} + {q2} = {}",
                q1 + q2
            )));
        }
        Ok(ClickStatistics { q1, q2, n_pulses: None, counts: None })
    }

    /// Subtract externally estimated accidental rates (e.g. from the
    /// side-peak coincidence windows), clamping at zero.
    pub fn subtract_accidentals(&self, q1_acc: f64, q2_acc: f64) -> Result<Self> {
        if !(q1_acc >= 0.0 && q2_acc >= 0.0) {
            return Err(CoreError::invalid("accidental rates must be >= 0"));
        }
        ClickStatistics::from_rates((self.q1 - q1_acc).max(0.0), (self.q2 - q2_acc).max(0.0))
    }
}

/// Exact expected click rates (Q1, Q2) for a photon-number distribution —
/// the closed-form enumeration the simulator converges to.
pub fn expected_click_rates(
    dist: &PhotonNumberDistribution,
    cfg: &HbtConfig,
) -> Result<(f64, f64)> {
    dist.require_valid()?;
    let a = cfg.t() * cfg.p_a();
    let b = cfg.r() * cfg.p_b();
    let mut q1 = 0.0;
    let mut q2 = 0.0;
    for (n, &p) in dist.probs.iter().enumerate() {
        let na = (1.0 - a).powi(n as i32);
        let nb = (1.0 - b).powi(n as i32);
        let nn = (1.0 - a - b).powi(n as i32);
        q1 += p * (na + nb - 2.0 * nn);
        q2 += p * (1.0 - na - nb + nn);
    }
    // both alternating sums are exactly non-negative; rounding in the
    // cancellations can leave an O(1e-17) negative residue
    Ok((q1.max(0.0), q2.max(0.0)))
}

/// Simulate `n_pulses` through the HBT setup: draw a photon number per
/// pulse, route each photon through the splitter (transmit with probability
/// T), fire each threshold detector if at least one routed photon is
/// detected. Deterministic per seed and thread-count independent (fixed
/// 4096-pulse chunks with derived ChaCha streams).
pub fn simulate_clicks(
    dist: &PhotonNumberDistribution,
    cfg: &HbtConfig,
    n_pulses: u64,
    seed: u64,
) -> Result<ClickStatistics> {
    dist.require_valid()?;
    if n_pulses == 0 {
        return Err(CoreError::invalid("n_pulses must be >= 1"));
    }

    let mut cdf = Vec::with_capacity(dist.probs.len());
    let mut acc = 0.0;
    for &p in &dist.probs {
        acc += p;
        cdf.push(acc);
    }

    let n_chunks = n_pulses.div_ceil(CHUNK as u64);
    let (none, single, double) = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, chunk, seed_domain::HBT));
            let lo = chunk * CHUNK as u64;
            let hi = ((chunk + 1) * (CHUNK as u64)).min(n_pulses);
            let mut tally = (0u64, 0u64, 0u64);
            for _ in lo..hi {
                let mut n = draw_index(&cdf, acc, &mut rng);
                if cfg.accidental_overlap() > 0.0 && rng.gen::<f64>() < cfg.accidental_overlap() {
                    n += draw_index(&cdf, acc, &mut rng);
                }
                let mut clicked_a = false;
                let mut clicked_b = false;
                for _ in 0..n {
                    if rng.gen::<f64>() < cfg.t() {
                        clicked_a |= rng.gen::<f64>() < cfg.p_a();
                    } else {
                        clicked_b |= rng.gen::<f64>() < cfg.p_b();
                    }
                }
                match (clicked_a, clicked_b) {
                    (true, true) => tally.2 += 1,
                    (false, false) => tally.0 += 1,
                    _ => tally.1 += 1,
                }
            }
            tally
        })
        .reduce(|| (0, 0, 0), |x, y| (x.0 + y.0, x.1 + y.1, x.2 + y.2));

    Ok(ClickStatistics {
        q1: single as f64 / n_pulses as f64,
        q2: double as f64 / n_pulses as f64,
        n_pulses: Some(n_pulses),
        counts: Some(ClickCounts { none, single, double }),
    })
}

fn draw_index(cdf: &[f64], total: f64, rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rng.gen::<f64>() * total;
    cdf.partition_point(|&c| c < u).min(cdf.len() - 1)
}

/// Photon-number probabilities inferred from click rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferredProbabilities {
    pub p0: f64,
    pub p1: f64,
    pub p2plus: f64,
    /// 1σ uncertainties from binomial counting noise (zero when the pulse
    /// count is unknown).
    pub sigma_p0: f64,
    pub sigma_p1: f64,
    pub sigma_p2plus: f64,
    /// True when every probability lies within [0, 1] up to 5σ of counting
    /// noise (exactly, when no pulse count is available).
    pub physical: bool,
    /// Diagnostic, e.g. when p2plus is large enough that the neglected
    /// n ≥ 3 terms may bias the estimate.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

/// Invert click rates into (p0, p1, p2plus), neglecting n ≥ 3 terms:
///
/// ```text
/// p2plus = Q2 / (2 pA pB T R)
/// p1     = (Q1 − p2plus·[2TR(qB pA + qA pB) + T²(1−qA²) + R²(1−qB²)]) / (T pA + R pB)
/// p0     = 1 − p1 − p2plus
/// ```
///
/// Outputs are not clamped — estimator bias must stay visible — but a
/// `physical` flag reports whether each value is within [0,1] up to 5σ of
/// binomial counting noise (Q1–Q2 anticorrelation neglected).
pub fn infer_probabilities(
    stats: &ClickStatistics,
    cfg: &HbtConfig,
) -> Result<InferredProbabilities> {
    let (t, r) = (cfg.t(), cfg.r());
    let (pa, pb) = (cfg.p_a(), cfg.p_b());
    let (qa, qb) = (cfg.q_a(), cfg.q_b());
    let c2 = 2.0 * pa * pb * t * r;
    let c1 = t * pa + r * pb;
    if c2 == 0.0 || c1 == 0.0 {
        return Err(CoreError::invalid(
            "inference requires T·R > 0 and pA, pB > 0 (both arms must be able to click)",
        ));
    }

    let k = 2.0 * t * r * (qb * pa + qa * pb) + t * t * (1.0 - qa * qa) + r * r * (1.0 - qb * qb);
    let p2plus = stats.q2 / c2;
    let p1 = (stats.q1 - p2plus * k) / c1;
    let p0 = 1.0 - p1 - p2plus;

    let (sigma_q1, sigma_q2) = match stats.n_pulses {
        Some(n) if n > 0 => {
            let n = n as f64;
            (
                (stats.q1 * (1.0 - stats.q1) / n).sqrt(),
                (stats.q2 * (1.0 - stats.q2) / n).sqrt(),
            )
        }
        _ => (0.0, 0.0),
    };
    let sigma_p2plus = sigma_q2 / c2;
    let sigma_p1 = sigma_q1.hypot(k * sigma_p2plus) / c1;
    let sigma_p0 = sigma_p1.hypot(sigma_p2plus);

    let within = |p: f64, s: f64| p >= -(5.0 * s + 1e-12) && p <= 1.0 + 5.0 * s + 1e-12;
    let physical =
        within(p0, sigma_p0) && within(p1, sigma_p1) && within(p2plus, sigma_p2plus);
    let note = (p2plus > 0.2).then(|| {
        format!(
            "inferred p2plus = {p2plus:.4} > 0.2: the inversion neglects n >= 3 \
             contributions and may be biased"
        )
    });

    Ok(InferredProbabilities {
        p0,
        p1,
        p2plus,
        sigma_p0,
        sigma_p1,
        sigma_p2plus,
        physical,
        note,
    })
}

/// Undo a known pre-splitter transmittance `T' ∈ (0, 1]`:
/// `p2plus' = p2plus/T'²`, `p1' = p1/T' − 2 p2plus'(1−T')`,
/// `p0' = 1 − p1' − p2plus'`. Exact inverse of binomial loss on states
/// supported on {0, 1, 2}.
pub fn correct_loss(p0: f64, p1: f64, p2plus: f64, t_prime: f64) -> Result<(f64, f64, f64)> {
    if !(t_prime > 0.0 && t_prime <= 1.0) {
        return Err(CoreError::domain(format!(
            "transmittance correction T' must be in (0, 1], got {t_prime}"
        )));
    }
    for (name, p) in [("p0", p0), ("p1", p1), ("p2plus", p2plus)] {
        if !p.is_finite() {
            return Err(CoreError::invalid(format!("{name} must be finite, got {p}")));
        }
    }
    let p2c = p2plus / (t_prime * t_prime);
    let p1c = p1 / t_prime - 2.0 * p2c * (1.0 - t_prime);
    Ok((1.0 - p1c - p2c, p1c, p2c))
}

/// [`correct_loss`] applied to a full inference result, propagating the
/// counting uncertainties through the same linear map (the p1/p2plus
/// correlation is neglected, as in the original inference).
pub fn correct_loss_inferred(
    inf: &InferredProbabilities,
    t_prime: f64,
) -> Result<InferredProbabilities> {
    let (p0, p1, p2plus) = correct_loss(inf.p0, inf.p1, inf.p2plus, t_prime)?;
    let sigma_p2plus = inf.sigma_p2plus / (t_prime * t_prime);
    let sigma_p1 = (inf.sigma_p1 / t_prime).hypot(2.0 * (1.0 - t_prime) * sigma_p2plus);
    let sigma_p0 = sigma_p1.hypot(sigma_p2plus);

    let within = |p: f64, s: f64| p >= -(5.0 * s + 1e-12) && p <= 1.0 + 5.0 * s + 1e-12;
    let physical =
        within(p0, sigma_p0) && within(p1, sigma_p1) && within(p2plus, sigma_p2plus);
    Ok(InferredProbabilities {
        p0,
        p1,
        p2plus,
        sigma_p0,
        sigma_p1,
        sigma_p2plus,
        physical,
        note: inf.note.clone(),
    })
}

/// Heralding efficiency from raw rates:
/// `η = coincidences_per_pulse / (herald_rate · Π corrections)`, the
/// corrections being known efficiencies already accounted for elsewhere
/// (detector, splitter, optics, coupling).
pub fn heralding_efficiency(
    coinc_per_pulse: f64,
    herald_rate_per_pulse: f64,
    corrections: &[f64],
) -> Result<f64> {
    if !(coinc_per_pulse >= 0.0) || !coinc_per_pulse.is_finite() {
        return Err(CoreError::invalid(format!(
            "coincidence rate must be >= 0, got {coinc_per_pulse}"
        )));
    }
    if !(herald_rate_per_pulse > 0.0) {
        return Err(CoreError::invalid(format!(
            "herald rate must be > 0, got {herald_rate_per_pulse}"
        )));
    }
    if corrections.is_empty() {
        return Err(CoreError::invalid(
            "corrections must list at least one known efficiency factor",
        ));
    }
    let mut denom = herald_rate_per_pulse;
    for &c in corrections {
        if !(c > 0.0 && c <= 1.0) {
            return Err(CoreError::invalid(format!(
                "each correction must be in (0, 1], got {c}"
            )));
        }
        denom *= c;
    }
    Ok(coinc_per_pulse / denom)
}
