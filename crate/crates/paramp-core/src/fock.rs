//! Truncated photon-number (Fock) distributions and exact moment summaries.
//!
//! A [`PhotonNumberDistribution`] is a finite probability vector
//! `probs[n] = p_n` over photon numbers `n = 0..=n_max`. The derived
//! quantities used throughout are the mean `m`, the variance `s²`, and the
//! normalized second-order correlation
//!
//! ```text
//! g² = 1 + (s² − m) / m²      (undefined at m = 0)
//! ```
//!
//! together with the click-level probabilities `p0`, `p1`, and the tail sum
//! `p2+ = Σ_{n≥2} p_n`.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Normalization tolerance for a valid distribution.
pub const NORM_TOL: f64 = 1e-9;
/// Maximum tail entry left behind by auto-truncating constructors.
pub const TAIL_TOL: f64 = 1e-12;

/// A probability distribution over photon number, truncated at `n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonNumberDistribution {
    /// `probs[n]` is the probability of exactly `n` photons.
    pub probs: Vec<f64>,
}

/// Outcome of [`PhotonNumberDistribution::validate`]: either `Ok` or the
/// first violated invariant, reported as text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValidationReport {
    /// All invariants hold.
    Valid,
    /// At least one invariant is violated; the message describes the first.
    Invalid(String),
}

impl ValidationReport {
    /// True for [`ValidationReport::Valid`].
    pub fn is_valid(&self) -> bool {
        matches!(self, ValidationReport::Valid)
    }
}

/// Exact moments of a photon-number distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    /// Mean photon number.
    pub m: f64,
    /// Photon-number variance.
    pub s2: f64,
    /// Normalized second-order correlation; `None` when `m = 0`, where the
    /// ratio is undefined (flagged rather than propagated as NaN).
    pub g2_pre: Option<f64>,
}

impl PhotonNumberDistribution {
    /// Wrap a raw probability vector without validating it; combine with
    /// [`validate`](Self::validate) when the source is untrusted.
    pub fn from_probs(probs: Vec<f64>) -> Self {
        PhotonNumberDistribution { probs }
    }

    /// Truncation order: the largest representable photon number.
    pub fn n_max(&self) -> usize {
        self.probs.len().saturating_sub(1)
    }

    /// Probability of zero photons.
    pub fn p0(&self) -> f64 {
        self.probs.first().copied().unwrap_or(0.0)
    }

    /// Probability of exactly one photon.
    pub fn p1(&self) -> f64 {
        self.probs.get(1).copied().unwrap_or(0.0)
    }

    /// Tail probability of two or more photons.
    pub fn p2_plus(&self) -> f64 {
        self.probs.iter().skip(2).sum()
    }

    /// Check the structural invariants: non-empty, all entries
    /// non-negative and finite, and total probability `1 ± 1e-9`.
    ///
    /// Returns a report rather than an error so callers can decide whether
    /// a violation is fatal.
    pub fn validate(&self) -> ValidationReport {
        if self.probs.is_empty() {
            return ValidationReport::Invalid("empty probability vector".into());
        }
        for (n, &p) in self.probs.iter().enumerate() {
            if !p.is_finite() {
                return ValidationReport::Invalid(format!("probs[{n}] = {p} is not finite"));
            }
            if p < 0.0 {
                return ValidationReport::Invalid(format!("probs[{n}] = {p} is negative"));
            }
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return ValidationReport::Invalid(format!("sum = {sum}"));
        }
        ValidationReport::Valid
    }

    /// [`validate`](Self::validate) as a `Result`, for call sites that
    /// require a valid distribution.
    pub fn require_valid(&self) -> Result<()> {
        match self.validate() {
            ValidationReport::Valid => Ok(()),
            ValidationReport::Invalid(msg) => Err(CoreError::invalid(msg)),
        }
    }

    /// Exact mean, variance and `g²` by direct summation.
    ///
    /// Errors if the distribution fails [`validate`](Self::validate).
    pub fn moments(&self) -> Result<MomentSummary> {
        self.require_valid()?;
        let mut m = 0.0;
        let mut m2 = 0.0;
        for (n, &p) in self.probs.iter().enumerate() {
            let nf = n as f64;
            m += nf * p;
            m2 += nf * nf * p;
        }
        let s2 = (m2 - m * m).max(0.0);
        let g2_pre = if m > 0.0 { Some(1.0 + (s2 - m) / (m * m)) } else { None };
        Ok(MomentSummary { m, s2, g2_pre })
    }

    /// Serialize as the JSON interchange form `{"probs": [...]}`.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parse the JSON interchange form `{"probs": [...]}` and validate it.
    pub fn from_json(text: &str) -> Result<Self> {
        let dist: PhotonNumberDistribution = serde_json::from_str(text)?;
        dist.require_valid()?;
        Ok(dist)
    }
}

impl MomentSummary {
    /// Build a summary directly from `(m, s²)`, deriving `g²`.
    pub fn from_mean_variance(m: f64, s2: f64) -> Result<Self> {
        if !(m >= 0.0) || !s2.is_finite() || s2 < 0.0 {
            return Err(CoreError::invalid(format!(
                "moment summary requires m >= 0 and s2 >= 0, got m={m}, s2={s2}"
            )));
        }
        let g2_pre = if m > 0.0 { Some(1.0 + (s2 - m) / (m * m)) } else { None };
        Ok(MomentSummary { m, s2, g2_pre })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_vector_is_valid() {
        let d = PhotonNumberDistribution::from_probs(vec![1.0]);
        assert!(d.validate().is_valid());
    }

    #[test]
    fn normalization_violation_reports_sum() {
        let d = PhotonNumberDistribution::from_probs(vec![0.5, 0.6]);
        match d.validate() {
            ValidationReport::Invalid(msg) => assert!(msg.contains("sum = 1.1"), "{msg}"),
            ValidationReport::Valid => panic!("should be invalid"),
        }
    }

    #[test]
    fn two_state_mixture_is_valid() {
        let d = PhotonNumberDistribution::from_probs(vec![0.67, 0.33]);
        assert!(d.validate().is_valid());
    }

    #[test]
    fn negative_entry_is_rejected() {
        let d = PhotonNumberDistribution::from_probs(vec![1.1, -0.1]);
        match d.validate() {
            ValidationReport::Invalid(msg) => assert!(msg.contains("negative"), "{msg}"),
            ValidationReport::Valid => panic!("should be invalid"),
        }
    }

    #[test]
    fn fock_one_moments_are_degenerate() {
        let d = PhotonNumberDistribution::from_probs(vec![0.0, 1.0]);
        let ms = d.moments().unwrap();
        assert_eq!(ms.m, 1.0);
        assert_eq!(ms.s2, 0.0);
        assert_eq!(ms.g2_pre, Some(0.0));
    }

    #[test]
    fn vacuum_g2_is_flagged_undefined() {
        let d = PhotonNumberDistribution::from_probs(vec![1.0]);
        let ms = d.moments().unwrap();
        assert_eq!(ms.m, 0.0);
        assert_eq!(ms.g2_pre, None);
    }

    #[test]
    fn three_level_mixture_moments_match_direct_sums() {
        // p = (0.715, 0.239, 0.046): m = 0.331, s2 = 0.313439,
        // g2 = 0.83971486204032457 (high-precision reference).
        let d = PhotonNumberDistribution::from_probs(vec![0.715, 0.239, 0.046]);
        let ms = d.moments().unwrap();
        assert!((ms.m - 0.331).abs() < 1e-15);
        assert!((ms.s2 - 0.313439).abs() < 1e-15);
        assert!((ms.g2_pre.unwrap() - 0.839_714_862_040_324_57).abs() < 1e-12);
    }

    #[test]
    fn tail_accessors_split_the_mass() {
        let d = PhotonNumberDistribution::from_probs(vec![0.4, 0.2, 0.3, 0.1]);
        assert_eq!(d.p0(), 0.4);
        assert_eq!(d.p1(), 0.2);
        assert!((d.p2_plus() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_preserves_probs() {
        let d = PhotonNumberDistribution::from_probs(vec![0.5, 0.25, 0.25]);
        let text = d.to_json().unwrap();
        assert!(text.contains("\"probs\""));
        let back = PhotonNumberDistribution::from_json(&text).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn json_parse_rejects_invalid_distribution() {
        assert!(PhotonNumberDistribution::from_json("{\"probs\": [0.5, 0.6]}").is_err());
    }
}
