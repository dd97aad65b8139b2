//! Constructors for the standard phase-independent input states, the
//! binomial loss channel, and the heralded SPDC source model.
//!
//! Auto-truncating constructors (thermal, coherent, heralded) extend the
//! probability vector until the dropped tail mass is below `1e-13` and the
//! last kept entry is below [`TAIL_TOL`](crate::fock::TAIL_TOL), then
//! renormalize; the resulting moments are exact to well below the crate's
//! `1e-9` tolerances (checked up to mean 20 for coherent states).

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::fock::{PhotonNumberDistribution, TAIL_TOL};

/// Largest photon number a constructor will extend to before giving up.
const TRUNCATION_CAP: usize = 4096;
/// Dropped tail mass allowed by auto-truncation.
const TAIL_MASS_TOL: f64 = 1e-13;

/// Heralded SPDC source parameters.
///
/// A pulsed down-conversion source emits `n` photon pairs per pulse with
/// thermal statistics of mean [`mean_pairs`](Self::mean_pairs). The idler
/// arm feeds a threshold (click/no-click) herald detector of efficiency
/// [`eta_idler`](Self::eta_idler); the signal arm passes an effective
/// transmittance [`eta_signal`](Self::eta_signal), which equals the
/// heralding efficiency in the low-brightness limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeraldedSourceConfig {
    /// Mean photon pairs per pulse at the source output ("brightness").
    pub mean_pairs: f64,
    /// Signal-arm effective transmittance, in `(0, 1]`.
    pub eta_signal: f64,
    /// Idler-arm detection efficiency of the herald detector, in `(0, 1]`.
    /// Defaults to fiber coupling (0.8) × herald-detector efficiency (0.34).
    #[serde(default = "default_eta_idler")]
    pub eta_idler: f64,
}

/// Default idler-arm detection efficiency: 0.8 fiber coupling × 0.34
/// detector quantum efficiency.
pub const DEFAULT_ETA_IDLER: f64 = 0.8 * 0.34;

fn default_eta_idler() -> f64 {
    DEFAULT_ETA_IDLER
}

impl HeraldedSourceConfig {
    /// Range-check all fields (brightness capped at 10 as a model sanity
    /// bound; efficiencies in `(0, 1]`).
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_pairs >= 0.0 && self.mean_pairs < 10.0) {
            return Err(CoreError::domain(format!(
                "mean_pairs must be in [0, 10), got {}",
                self.mean_pairs
            )));
        }
        for (name, eta) in [("eta_signal", self.eta_signal), ("eta_idler", self.eta_idler)] {
            if !(eta > 0.0 && eta <= 1.0) {
                return Err(CoreError::domain(format!("{name} must be in (0, 1], got {eta}")));
            }
        }
        Ok(())
    }

    /// Parse from the JSON interchange form
    /// `{"mean_pairs": .., "eta_signal": .., "eta_idler": ..}` (the idler
    /// efficiency may be omitted).
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: HeraldedSourceConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// The vacuum state `|0⟩`.
pub fn make_vacuum() -> PhotonNumberDistribution {
    PhotonNumberDistribution::from_probs(vec![1.0])
}

/// The Fock (photon-number) state `|n⟩`, `n ≤ 50`.
pub fn make_fock(n: usize) -> Result<PhotonNumberDistribution> {
    if n > 50 {
        return Err(CoreError::domain(format!("fock state order {n} exceeds the supported 50")));
    }
    let mut probs = vec![0.0; n + 1];
    probs[n] = 1.0;
    Ok(PhotonNumberDistribution::from_probs(probs))
}

/// Thermal state of mean photon number `n̄`: `p_n = n̄^n / (1+n̄)^{n+1}`.
pub fn make_thermal(mean: f64) -> Result<PhotonNumberDistribution> {
    if !(mean >= 0.0) {
        return Err(CoreError::domain(format!("thermal mean must be >= 0, got {mean}")));
    }
    if mean == 0.0 {
        return Ok(make_vacuum());
    }
    let q = mean / (1.0 + mean);
    let mut term = 1.0 / (1.0 + mean);
    let mut probs = Vec::new();
    loop {
        probs.push(term);
        // Exact geometric tail beyond the entry just pushed: term * n̄.
        if term < TAIL_TOL && term * mean < TAIL_MASS_TOL {
            break;
        }
        if probs.len() > TRUNCATION_CAP {
            return Err(CoreError::domain(format!(
                "thermal mean {mean} needs more than {TRUNCATION_CAP} Fock terms"
            )));
        }
        term *= q;
    }
    Ok(normalized(probs))
}

/// Coherent state of the given mean photon number: Poisson statistics.
pub fn make_coherent(mean: f64) -> Result<PhotonNumberDistribution> {
    if !(mean >= 0.0) {
        return Err(CoreError::domain(format!("coherent mean must be >= 0, got {mean}")));
    }
    if mean == 0.0 {
        return Ok(make_vacuum());
    }
    let mut term = (-mean).exp();
    let mut probs = Vec::new();
    let mut n = 0usize;
    loop {
        probs.push(term);
        // Past the mode the terms decay at least geometrically with ratio
        // r = mean/(n+2); bound the tail by term * r/(1-r).
        let r = mean / (n as f64 + 2.0);
        let tail_bound = if r < 1.0 { term * r / (1.0 - r) } else { f64::INFINITY };
        if term < TAIL_TOL && tail_bound < TAIL_MASS_TOL {
            break;
        }
        if probs.len() > TRUNCATION_CAP {
            return Err(CoreError::domain(format!(
                "coherent mean {mean} needs more than {TRUNCATION_CAP} Fock terms"
            )));
        }
        n += 1;
        term *= mean / n as f64;
    }
    Ok(normalized(probs))
}

/// Convex mixture `Σ_i w_i d_i`, padded to the longest component.
pub fn mix(
    weights: &[f64],
    dists: &[PhotonNumberDistribution],
) -> Result<PhotonNumberDistribution> {
    if weights.len() != dists.len() {
        return Err(CoreError::invalid(format!(
            "mix: {} weights vs {} distributions",
            weights.len(),
            dists.len()
        )));
    }
    if weights.is_empty() {
        return Err(CoreError::invalid("mix: empty input"));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
        return Err(CoreError::invalid(format!("mix: negative weight {w}")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(CoreError::invalid(format!("mix: weights sum to {total}, expected 1")));
    }
    for d in dists {
        d.require_valid()?;
    }
    let len = dists.iter().map(|d| d.probs.len()).max().unwrap();
    let mut probs = vec![0.0; len];
    for (w, d) in weights.iter().zip(dists) {
        for (slot, &p) in probs.iter_mut().zip(&d.probs) {
            *slot += w * p;
        }
    }
    Ok(PhotonNumberDistribution::from_probs(probs))
}

/// Binomial loss channel of transmittance `η`:
/// `p'_k = Σ_{n≥k} p_n C(n,k) η^k (1−η)^{n−k}`.
///
/// Each source row is evaluated in the log domain; the naive linear
/// recurrence starts at `(1−η)^n`, which underflows to a hard zero near
/// `n ≈ 300` at `η ≈ 0.9` and would silently erase the row.
pub fn apply_loss(
    dist: &PhotonNumberDistribution,
    eta: f64,
) -> Result<PhotonNumberDistribution> {
    dist.require_valid()?;
    if !(0.0..=1.0).contains(&eta) {
        return Err(CoreError::domain(format!("loss transmittance must be in [0, 1], got {eta}")));
    }
    if eta == 1.0 {
        return Ok(dist.clone());
    }
    if eta == 0.0 {
        return Ok(make_vacuum());
    }
    let ln_eta = eta.ln();
    let ln_bar = (-eta).ln_1p(); // ln(1−η), accurate for small η
    let mut out = vec![0.0; dist.probs.len()];
    for (n, &pn) in dist.probs.iter().enumerate() {
        if pn == 0.0 {
            continue;
        }
        let nf = n as f64;
        let mut ln_choose = 0.0; // ln C(n, 0)
        for (k, slot) in out.iter_mut().enumerate().take(n + 1) {
            let kf = k as f64;
            let ln_p = ln_choose + kf * ln_eta + (nf - kf) * ln_bar;
            *slot += pn * ln_p.exp();
            if k < n {
                ln_choose += ((nf - kf) / (kf + 1.0)).ln();
            }
        }
    }
    Ok(PhotonNumberDistribution::from_probs(out))
}

/// Conditional signal-arm photon-number distribution of the heralded SPDC
/// source, together with the herald (click) probability per pulse.
///
/// `p(k | click) = Σ_n P_th(n) · Binom(k; n, η_s) · [1 − (1−η_i)^n] / P(click)`
/// with `P_th` thermal of mean `mean_pairs` and
/// `P(click) = Σ_n P_th(n) [1 − (1−η_i)^n]`.
///
/// A zero-brightness source never heralds, so the conditional distribution
/// is undefined and an explicit error is returned.
pub fn heralded_spdc(
    cfg: &HeraldedSourceConfig,
) -> Result<(PhotonNumberDistribution, f64)> {
    cfg.validate()?;
    if cfg.mean_pairs == 0.0 {
        return Err(CoreError::domain(
            "heralded source with mean_pairs = 0 never heralds; conditional state undefined",
        ));
    }
    let nbar = cfg.mean_pairs;
    let q = nbar / (1.0 + nbar);
    let ln_eta = cfg.eta_signal.ln();
    let ln_bar = (-cfg.eta_signal).ln_1p();
    let no_click = 1.0 - cfg.eta_idler;

    let mut herald_prob = 0.0;
    let mut acc: Vec<f64> = Vec::new();
    let mut thermal_term = 1.0 / (1.0 + nbar); // P_th(0)
    let mut n = 0usize;
    loop {
        // Weight of the n-pair branch among heralded pulses.
        let click = 1.0 - no_click.powi(n as i32);
        let w = thermal_term * click;
        herald_prob += w;
        if w > 0.0 {
            if acc.len() < n + 1 {
                acc.resize(n + 1, 0.0);
            }
            // Spread w over k = 0..=n through the signal-arm binomial, in
            // the log domain for the same underflow reason as apply_loss.
            // Zero exponents are skipped, not multiplied out, so that the
            // unit-transmittance edges (ln η = 0 or ln(1−η) = −∞) never
            // produce a 0·∞ indeterminate.
            let nf = n as f64;
            let mut ln_choose = 0.0;
            for (k, slot) in acc.iter_mut().enumerate().take(n + 1) {
                let kf = k as f64;
                let mut ln_term = ln_choose;
                if k > 0 {
                    ln_term += kf * ln_eta;
                }
                if k < n {
                    ln_term += (nf - kf) * ln_bar;
                }
                *slot += w * ln_term.exp();
                if k < n {
                    ln_choose += ((nf - kf) / (kf + 1.0)).ln();
                }
            }
        }
        // thermal_term * nbar bounds the whole remaining thermal tail, and
        // the click factor only shrinks the weights further.
        if thermal_term * nbar < TAIL_MASS_TOL * 1e-3 {
            break;
        }
        if n > TRUNCATION_CAP {
            return Err(CoreError::domain(format!(
                "heralded source mean_pairs {nbar} needs more than {TRUNCATION_CAP} pair terms"
            )));
        }
        thermal_term *= q;
        n += 1;
    }

    for slot in &mut acc {
        *slot /= herald_prob;
    }
    // Drop the negligible high-k tail left behind by branches that were
    // themselves negligible.
    while acc.len() > 1 {
        let last = *acc.last().unwrap();
        if last < TAIL_TOL && acc[acc.len() - 2] < TAIL_TOL {
            acc.pop();
        } else {
            break;
        }
    }
    Ok((normalized(acc), herald_prob))
}

/// Renormalize a raw term vector to total probability exactly 1.
fn normalized(mut probs: Vec<f64>) -> PhotonNumberDistribution {
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    PhotonNumberDistribution::from_probs(probs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_constructors_are_deltas() {
        assert_eq!(make_vacuum().probs, vec![1.0]);
        assert_eq!(make_fock(0).unwrap().probs, vec![1.0]);
        assert_eq!(make_fock(1).unwrap().probs, vec![0.0, 1.0]);
        let ms = make_fock(2).unwrap().moments().unwrap();
        assert_eq!((ms.m, ms.s2), (2.0, 0.0));
        assert!(make_fock(51).is_err());
    }

    #[test]
    fn thermal_matches_geometric_law() {
        assert_eq!(make_thermal(0.0).unwrap().probs, vec![1.0]);
        let d = make_thermal(1.0).unwrap();
        assert!((d.probs[0] - 0.5).abs() < 1e-12);
        assert!((d.probs[1] - 0.25).abs() < 1e-12);
        // auto-truncation invariants
        assert!(*d.probs.last().unwrap() < TAIL_TOL);
        assert!(d.validate().is_valid());
        let ms = d.moments().unwrap();
        assert!((ms.m - 1.0).abs() < 1e-6);
        assert!((ms.s2 - 2.0).abs() < 1e-6);
    }

    #[test]
    fn thermal_g2_is_two() {
        let ms = make_thermal(0.1).unwrap().moments().unwrap();
        assert!((ms.g2_pre.unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn coherent_matches_poisson_law() {
        assert_eq!(make_coherent(0.0).unwrap().probs, vec![1.0]);
        let d = make_coherent(1.0).unwrap();
        assert!((d.probs[0] - (-1.0f64).exp()).abs() < 1e-12);
        assert!(d.validate().is_valid());
        let ms = make_coherent(4.0).unwrap().moments().unwrap();
        assert!((ms.g2_pre.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coherent_variance_equals_mean_up_to_large_brightness() {
        for &mean in &[0.01, 0.5, 3.0, 12.0, 20.0] {
            let ms = make_coherent(mean).unwrap().moments().unwrap();
            assert!((ms.s2 - ms.m).abs() < 1e-9, "mean {mean}: s2 {} vs m {}", ms.s2, ms.m);
        }
    }

    #[test]
    fn mix_reproduces_components_and_averages_means() {
        let vac = make_vacuum();
        let one = make_fock(1).unwrap();
        assert_eq!(mix(&[1.0], &[vac.clone()]).unwrap().probs, vac.probs);
        let m = mix(&[0.67, 0.33], &[vac, one]).unwrap();
        assert_eq!(m.probs, vec![0.67, 0.33]);

        let a = make_thermal(0.4).unwrap();
        let b = make_thermal(2.0).unwrap();
        let blend = mix(&[0.25, 0.75], &[a.clone(), b.clone()]).unwrap();
        let want = 0.25 * a.moments().unwrap().m + 0.75 * b.moments().unwrap().m;
        assert!((blend.moments().unwrap().m - want).abs() < 1e-9);
    }

    #[test]
    fn mix_rejects_bad_weights() {
        let vac = make_vacuum();
        assert!(mix(&[0.5, 0.4], &[vac.clone(), vac.clone()]).is_err());
        assert!(mix(&[1.5, -0.5], &[vac.clone(), vac.clone()]).is_err());
        assert!(mix(&[1.0], &[vac.clone(), vac]).is_err());
    }

    #[test]
    fn loss_identity_and_known_values() {
        let one = make_fock(1).unwrap();
        assert_eq!(apply_loss(&one, 1.0).unwrap().probs, one.probs);
        let lossy = apply_loss(&one, 0.26).unwrap();
        assert!((lossy.probs[0] - 0.74).abs() < 1e-12);
        assert!((lossy.probs[1] - 0.26).abs() < 1e-12);

        let d = PhotonNumberDistribution::from_probs(vec![0.4, 0.2, 0.4]);
        let out = apply_loss(&d, 0.5).unwrap();
        for (got, want) in out.probs.iter().zip([0.6, 0.3, 0.1]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn loss_survives_deep_fock_underflow_regime() {
        // (1-0.91)^300 underflows a naive linear-recurrence start; the
        // log-domain row must still carry the full mass and mean.
        let mut probs = vec![0.0; 301];
        probs[300] = 1.0;
        let d = PhotonNumberDistribution::from_probs(probs);
        let out = apply_loss(&d, 0.91).unwrap();
        let ms = out.moments().unwrap();
        let sum: f64 = out.probs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
        assert!((ms.m - 273.0).abs() < 1e-6, "mean {}", ms.m);
    }

    #[test]
    fn loss_rejects_bad_eta() {
        let vac = make_vacuum();
        assert!(apply_loss(&vac, -0.1).is_err());
        assert!(apply_loss(&vac, 1.1).is_err());
    }

    #[test]
    fn heralded_low_brightness_limit_is_the_heralding_efficiency() {
        let cfg = HeraldedSourceConfig { mean_pairs: 1e-6, eta_signal: 0.51, eta_idler: 0.272 };
        let (d, herald_prob) = heralded_spdc(&cfg).unwrap();
        assert!((d.p1() - 0.51).abs() < 1e-5, "p1 {}", d.p1());
        assert!((d.p0() - 0.49).abs() < 1e-5, "p0 {}", d.p0());
        assert!(d.p2_plus() < 1e-5);
        // high-precision reference: 2.7199992601602012e-7
        assert!((herald_prob / 2.719_999_260_160_201e-7 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn heralded_lossless_click_guarantees_a_photon() {
        let cfg = HeraldedSourceConfig { mean_pairs: 0.1, eta_signal: 1.0, eta_idler: 1.0 };
        let (d, _) = heralded_spdc(&cfg).unwrap();
        assert!(d.p0() < 1e-15, "p0 {}", d.p0());
    }

    #[test]
    fn heralded_zero_brightness_is_an_error() {
        let cfg = HeraldedSourceConfig { mean_pairs: 0.0, eta_signal: 0.51, eta_idler: 0.272 };
        assert!(heralded_spdc(&cfg).is_err());
    }

    #[test]
    fn heralded_reduces_to_lossy_single_photon_at_low_brightness() {
        let b = 1e-4;
        let cfg = HeraldedSourceConfig { mean_pairs: b, eta_signal: 0.51, eta_idler: 0.272 };
        let (d, _) = heralded_spdc(&cfg).unwrap();
        let reference = apply_loss(&make_fock(1).unwrap(), 0.51).unwrap();
        for k in 0..2 {
            let r = reference.probs.get(k).copied().unwrap_or(0.0);
            assert!((d.probs[k] - r).abs() < 10.0 * b, "k={k}: {} vs {r}", d.probs[k]);
        }
    }

    #[test]
    fn heralded_headline_point_matches_reference_values() {
        // brightness 0.1 at overall signal transmittance 0.26
        // (high-precision reference: m = 0.30442679127725857,
        //  s2 = 0.23784233791403422, herald_prob = 0.026479750778816199)
        let cfg = HeraldedSourceConfig { mean_pairs: 0.1, eta_signal: 0.26, eta_idler: 0.272 };
        let (d, herald_prob) = heralded_spdc(&cfg).unwrap();
        let ms = d.moments().unwrap();
        assert!((ms.m - 0.304_426_791_277_258_57).abs() < 1e-10, "m {}", ms.m);
        assert!((ms.s2 - 0.237_842_337_914_034_22).abs() < 1e-10, "s2 {}", ms.s2);
        assert!((herald_prob - 0.026_479_750_778_816_199).abs() < 1e-12);
        assert!((d.p0() - 0.708_197_751_208_287_5).abs() < 1e-10);
        assert!((d.p1() - 0.279_586_465_445_659_19).abs() < 1e-10);
    }

    #[test]
    fn heralded_loss_composition_identity() {
        // heralded(eta_s) followed by extra loss eta_x equals
        // heralded(eta_s * eta_x): the binomial channels compose.
        let lhs = {
            let cfg =
                HeraldedSourceConfig { mean_pairs: 0.1, eta_signal: 0.51, eta_idler: 0.272 };
            apply_loss(&heralded_spdc(&cfg).unwrap().0, 0.26 / 0.51).unwrap()
        };
        let rhs = {
            let cfg = HeraldedSourceConfig {
                mean_pairs: 0.1,
                eta_signal: 0.26,
                eta_idler: 0.272,
            };
            heralded_spdc(&cfg).unwrap().0
        };
        for k in 0..rhs.probs.len().max(lhs.probs.len()) {
            let a = lhs.probs.get(k).copied().unwrap_or(0.0);
            let b = rhs.probs.get(k).copied().unwrap_or(0.0);
            assert!((a - b).abs() < 1e-12, "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn config_json_applies_idler_default() {
        let cfg = HeraldedSourceConfig::from_json(
            r#"{"mean_pairs": 0.1, "eta_signal": 0.51}"#,
        )
        .unwrap();
        assert_eq!(cfg.eta_idler, DEFAULT_ETA_IDLER);
        assert!(HeraldedSourceConfig::from_json(
            r#"{"mean_pairs": -1, "eta_signal": 0.51}"#
        )
        .is_err());
    }
}
