//! Per-pulse intensity records and bootstrap moment estimation.
//!
//! A [`PulseRecordSet`] is the experimental data unit: one detected
//! intensity per pulse (arbitrary linear units), an optional herald flag
//! per pulse, and free-form metadata. Moment estimation reports the sample
//! mean, unbiased variance and `g² = 1 + (var − mean)/mean²`, with
//! uncertainties from a seeded bootstrap (default 1000 resamples, 68%
//! central percentile interval, one independent stream per resample).

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::math::{derive_seed, seed_domain};

/// Default number of bootstrap resamples.
pub const DEFAULT_RESAMPLES: usize = 1000;

/// Per-pulse intensity records with optional herald flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseRecordSet {
    /// Detected intensity per pulse; non-negative, arbitrary linear units.
    pub counts: Vec<f64>,
    /// Optional herald flag per pulse (same length as `counts`).
    pub herald: Option<Vec<bool>>,
    /// Free-form provenance (gain, brightness label, seed, ...).
    pub meta: BTreeMap<String, String>,
}

/// Point estimates with bootstrap confidence intervals.
///
/// Intervals are central 68% percentile intervals, so their half-width is
/// directly usable as a 1σ uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    /// Sample mean of the counts.
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `g² = 1 + (var − mean)/mean²`.
    pub g2: f64,
    /// 68% bootstrap interval for the mean.
    pub mean_ci: (f64, f64),
    /// 68% bootstrap interval for the variance.
    pub variance_ci: (f64, f64),
    /// 68% bootstrap interval for g².
    pub g2_ci: (f64, f64),
    /// Number of bootstrap resamples used.
    pub resamples: usize,
    /// Seed the bootstrap streams were derived from.
    pub seed: u64,
}

impl MomentEstimate {
    /// Half-width of the g² interval, used as a 1σ uncertainty.
    pub fn g2_sigma(&self) -> f64 {
        0.5 * (self.g2_ci.1 - self.g2_ci.0)
    }
}

impl PulseRecordSet {
    /// Build a record set without herald flags.
    pub fn new(counts: Vec<f64>) -> Self {
        PulseRecordSet { counts, herald: None, meta: BTreeMap::new() }
    }

    /// Number of pulses.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    /// True when there are no pulses.
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Check structural invariants: finite non-negative counts and a
    /// herald column (when present) of matching length.
    pub fn validate(&self) -> Result<()> {
        if let Some(h) = &self.herald {
            if h.len() != self.counts.len() {
                return Err(CoreError::invalid(format!(
                    "herald length {} does not match counts length {}",
                    h.len(),
                    self.counts.len()
                )));
            }
        }
        if let Some((i, &c)) = self.counts.iter().enumerate().find(|(_, c)| !(**c >= 0.0)) {
            return Err(CoreError::invalid(format!("counts[{i}] = {c} is not a finite non-negative value")));
        }
        Ok(())
    }

    /// Keep only herald=1 pulses; identity when no herald column exists.
    pub fn conditioned(&self) -> PulseRecordSet {
        match &self.herald {
            None => self.clone(),
            Some(flags) => {
                let counts = self
                    .counts
                    .iter()
                    .zip(flags)
                    .filter(|(_, &h)| h)
                    .map(|(&c, _)| c)
                    .collect();
                PulseRecordSet { counts, herald: None, meta: self.meta.clone() }
            }
        }
    }

    /// Drop the herald column, keeping every pulse.
    pub fn unconditioned(&self) -> PulseRecordSet {
        PulseRecordSet { counts: self.counts.clone(), herald: None, meta: self.meta.clone() }
    }

    /// Write as CSV: optional `# key=value` metadata comment lines, then
    /// the header `pulse_index,counts[,herald]`, then one row per pulse.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        self.validate()?;
        for (k, v) in &self.meta {
            writeln!(w, "# {k}={v}")?;
        }
        if let Some(flags) = &self.herald {
            writeln!(w, "pulse_index,counts,herald")?;
            for (i, (c, h)) in self.counts.iter().zip(flags).enumerate() {
                writeln!(w, "{i},{c},{}", u8::from(*h))?;
            }
        } else {
            writeln!(w, "pulse_index,counts")?;
            for (i, c) in self.counts.iter().enumerate() {
                writeln!(w, "{i},{c}")?;
            }
        }
        Ok(())
    }

    /// Write as CSV to a file path.
    pub fn write_csv_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Parse the CSV form produced by [`write_csv`](Self::write_csv).
    ///
    /// Leading `# key=value` lines become metadata. Malformed rows are
    /// reported with their 1-based line number.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<PulseRecordSet> {
        let mut meta = BTreeMap::new();
        let mut header: Option<(usize, bool)> = None; // (line_no, has_herald)
        let mut counts = Vec::new();
        let mut herald = Vec::new();

        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            match header {
                None => {
                    let has_herald = match trimmed {
                        "pulse_index,counts" => false,
                        "pulse_index,counts,herald" => true,
                        other => {
                            return Err(CoreError::invalid(format!(
                                "line {line_no}: unexpected header '{other}' \
                                 (want 'pulse_index,counts[,herald]')"
                            )))
                        }
                    };
                    header = Some((line_no, has_herald));
                }
                Some((_, has_herald)) => {
                    let fields: Vec<&str> = trimmed.split(',').collect();
                    let want = if has_herald { 3 } else { 2 };
                    if fields.len() != want {
                        return Err(CoreError::invalid(format!(
                            "line {line_no}: expected {want} fields, got {}",
                            fields.len()
                        )));
                    }
                    fields[0].parse::<u64>().map_err(|_| {
                        CoreError::invalid(format!(
                            "line {line_no}: bad pulse index '{}'",
                            fields[0]
                        ))
                    })?;
                    let c: f64 = fields[1].parse().map_err(|_| {
                        CoreError::invalid(format!("line {line_no}: bad count '{}'", fields[1]))
                    })?;
                    if !(c >= 0.0) {
                        return Err(CoreError::invalid(format!(
                            "line {line_no}: count {c} is negative or non-finite"
                        )));
                    }
                    counts.push(c);
                    if has_herald {
                        match fields[2] {
                            "0" => herald.push(false),
                            "1" => herald.push(true),
                            other => {
                                return Err(CoreError::invalid(format!(
                                    "line {line_no}: herald must be 0 or 1, got '{other}'"
                                )))
                            }
                        }
                    }
                }
            }
        }

        let Some((_, has_herald)) = header else {
            return Err(CoreError::invalid("no header line found"));
        };
        if counts.is_empty() {
            return Err(CoreError::invalid("no data rows after the header"));
        }
        Ok(PulseRecordSet {
            counts,
            herald: has_herald.then_some(herald),
            meta,
        })
    }

    /// Parse CSV records from a file path.
    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<PulseRecordSet> {
        let file = std::fs::File::open(&path)?;
        PulseRecordSet::read_csv(std::io::BufReader::new(file))
    }
}

/// Mean, unbiased variance and g² of a slice.
///
/// Returns `None` for fewer than two values or a zero mean (g² undefined).
pub(crate) fn sample_stats(counts: &[f64]) -> Option<(f64, f64, f64)> {
    if counts.len() < 2 {
        return None;
    }
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    if mean <= 0.0 {
        return None;
    }
    let ss: f64 = counts.iter().map(|c| (c - mean) * (c - mean)).sum();
    let var = ss / (n - 1.0);
    let g2 = 1.0 + (var - mean) / (mean * mean);
    Some((mean, var, g2))
}

/// Linear-interpolated percentile of a sorted slice, `q ∈ [0, 1]`.
pub(crate) fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Estimate moments of a record set with bootstrap confidence intervals.
///
/// Each resample `i` draws `len` pulses with replacement using its own
/// ChaCha stream derived from `(seed, i)`, so the estimate is reproducible
/// and independent of thread scheduling. Intervals are 68% central
/// percentile intervals over the resample statistics.
pub fn estimate_moments(
    records: &PulseRecordSet,
    seed: u64,
    resamples: usize,
) -> Result<MomentEstimate> {
    records.validate()?;
    if records.len() < 2 {
        return Err(CoreError::Estimation(format!(
            "need at least 2 pulses, got {}",
            records.len()
        )));
    }
    let Some((mean, variance, g2)) = sample_stats(&records.counts) else {
        return Err(CoreError::Estimation(
            "record set has zero mean intensity; g² is undefined".into(),
        ));
    };
    if resamples < 2 {
        return Err(CoreError::Estimation(format!("need at least 2 resamples, got {resamples}")));
    }

    let n = records.counts.len();
    let stats: Vec<(f64, f64, f64)> = (0..resamples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i, seed_domain::BOOTSTRAP));
            let mut draw = Vec::with_capacity(n);
            for _ in 0..n {
                draw.push(records.counts[rng.gen_range(0..n)]);
            }
            sample_stats(&draw).unwrap_or((f64::NAN, f64::NAN, f64::NAN))
        })
        .collect();

    let interval = |pick: fn(&(f64, f64, f64)) -> f64| -> (f64, f64) {
        let mut values: Vec<f64> = stats.iter().map(pick).filter(|v| v.is_finite()).collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        (percentile(&values, 0.16), percentile(&values, 0.84))
    };

    Ok(MomentEstimate {
        mean,
        variance,
        g2,
        mean_ci: interval(|s| s.0),
        variance_ci: interval(|s| s.1),
        g2_ci: interval(|s| s.2),
        resamples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_constant_sample() {
        let rec = PulseRecordSet::new(vec![4.0; 100]);
        let est = estimate_moments(&rec, 0, 100).unwrap();
        assert_eq!(est.mean, 4.0);
        assert_eq!(est.variance, 0.0);
        assert!((est.g2 - (1.0 - 0.25)).abs() < 1e-15);
        // every resample is identical, so the intervals collapse
        assert_eq!(est.g2_ci, (est.g2, est.g2));
    }

    #[test]
    fn exponential_intensities_give_g2_of_two() {
        // Thermal light in the continuous limit has exponential intensity
        // statistics, for which var = mean² and hence g² = 2. The scale is
        // large so the shot-noise term −1/mean (≈1.4e-4 here) stays far
        // inside the tolerance.
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let counts: Vec<f64> =
            (0..1_000_000).map(|_| -(1.0 - rng.gen::<f64>()).ln() * 7300.0).collect();
        let est = estimate_moments(&PulseRecordSet::new(counts), 5, 200).unwrap();
        assert!((est.g2 - 2.0).abs() < 0.01, "g2 = {}", est.g2);
        assert!(est.g2_ci.0 < est.g2 && est.g2 < est.g2_ci.1, "ci = {:?}", est.g2_ci);
        assert!(est.g2_sigma() < 0.01, "sigma = {}", est.g2_sigma());
    }

    #[test]
    fn estimation_error_cases() {
        assert!(estimate_moments(&PulseRecordSet::new(vec![]), 0, 10).is_err());
        assert!(estimate_moments(&PulseRecordSet::new(vec![1.0]), 0, 10).is_err());
        assert!(estimate_moments(&PulseRecordSet::new(vec![0.0; 50]), 0, 10).is_err());
    }

    #[test]
    fn bootstrap_is_seed_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let rec = PulseRecordSet::new((0..500).map(|_| rng.gen::<f64>() + 0.5).collect());
        let a = estimate_moments(&rec, 11, 300).unwrap();
        let b = estimate_moments(&rec, 11, 300).unwrap();
        let c = estimate_moments(&rec, 12, 300).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.g2_ci, c.g2_ci);
    }

    #[test]
    fn csv_round_trip_with_herald_and_meta() {
        let mut rec = PulseRecordSet {
            counts: vec![1.5, 0.0, 3.25],
            herald: Some(vec![true, false, true]),
            meta: BTreeMap::new(),
        };
        rec.meta.insert("gain".into(), "6.5".into());
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# gain=6.5\npulse_index,counts,herald\n"));
        let back = PulseRecordSet::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn csv_round_trip_without_herald() {
        let rec = PulseRecordSet::new(vec![2.0, 4.0]);
        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let back = PulseRecordSet::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let bad_row = "pulse_index,counts\n0,1.5\n1,not-a-number\n";
        let err = PulseRecordSet::read_csv(bad_row.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");

        let empty = "pulse_index,counts\n";
        let err = PulseRecordSet::read_csv(empty.as_bytes()).unwrap_err().to_string();
        assert!(err.contains("no data rows"), "{err}");

        let bad_header = "intensity\n1.0\n";
        assert!(PulseRecordSet::read_csv(bad_header.as_bytes()).is_err());
    }

    #[test]
    fn conditioning_filters_heralded_pulses() {
        let rec = PulseRecordSet {
            counts: vec![1.0, 2.0, 3.0, 4.0],
            herald: Some(vec![true, false, true, false]),
            meta: BTreeMap::new(),
        };
        assert_eq!(rec.conditioned().counts, vec![1.0, 3.0]);
        assert_eq!(rec.unconditioned().counts, rec.counts);
        assert!(rec.unconditioned().herald.is_none());
    }
}
