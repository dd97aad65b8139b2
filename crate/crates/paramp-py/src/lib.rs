//! Python bindings for paramp-core (module name `paramp`, stable abi3).
//!
//! Thin functional wrappers: photon-number distributions are plain
//! `list[float]` probability vectors, structured results come back as
//! dicts mirroring the library's JSON serialization. Domain violations
//! and malformed inputs raise `ValueError`; estimation and I/O failures
//! raise `RuntimeError`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use paramp_core as pc;
use pc::error::CoreError;
use pc::fock::PhotonNumberDistribution;

const ETA_IDLER_DEFAULT: f64 = pc::states::DEFAULT_ETA_IDLER;

fn err(e: CoreError) -> PyErr {
    match e {
        CoreError::InvalidInput(_) | CoreError::Domain(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn dist(probs: Vec<f64>) -> PyResult<PhotonNumberDistribution> {
    let d = PhotonNumberDistribution::from_probs(probs);
    d.require_valid().map_err(err)?;
    Ok(d)
}

fn gain(g: f64) -> PyResult<pc::opa::GainSetting> {
    pc::opa::GainSetting::new(g).map_err(err)
}

/// Serialize any library value to its JSON shape, then into Python
/// dicts/lists/scalars.
fn to_py(py: Python<'_>, value: &impl serde::Serialize) -> PyResult<PyObject> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<PyObject> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.to_object(py),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.to_object(py)
            } else if let Some(u) = n.as_u64() {
                u.to_object(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).to_object(py)
            }
        }
        Value::String(s) => s.to_object(py),
        Value::Array(items) => {
            let list = PyList::empty_bound(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.to_object(py)
        }
        Value::Object(map) => {
            let d = PyDict::new_bound(py);
            for (k, item) in map {
                d.set_item(k, json_to_py(py, item)?)?;
            }
            d.to_object(py)
        }
    })
}

// ---------------------------------------------------------------------------
// States

/// Vacuum distribution [1.0].
#[pyfunction]
fn vacuum_state() -> Vec<f64> {
    pc::states::make_vacuum().probs
}

/// Fock state |n⟩ as a probability vector.
#[pyfunction]
fn fock_state(n: usize) -> PyResult<Vec<f64>> {
    Ok(pc::states::make_fock(n).map_err(err)?.probs)
}

/// Thermal distribution of the given mean photon number.
#[pyfunction]
fn thermal_state(mean: f64) -> PyResult<Vec<f64>> {
    Ok(pc::states::make_thermal(mean).map_err(err)?.probs)
}

/// Poissonian (coherent-state) distribution of the given mean.
#[pyfunction]
fn coherent_state(mean: f64) -> PyResult<Vec<f64>> {
    Ok(pc::states::make_coherent(mean).map_err(err)?.probs)
}

/// Heralded SPDC signal state; returns (probs, herald_prob).
#[pyfunction]
#[pyo3(signature = (mean_pairs, eta_signal=1.0, eta_idler=ETA_IDLER_DEFAULT))]
fn heralded_state(mean_pairs: f64, eta_signal: f64, eta_idler: f64) -> PyResult<(Vec<f64>, f64)> {
    let cfg = pc::states::HeraldedSourceConfig { mean_pairs, eta_signal, eta_idler };
    let (d, herald_prob) = pc::states::heralded_spdc(&cfg).map_err(err)?;
    Ok((d.probs, herald_prob))
}

/// Binomial loss channel of transmittance eta.
#[pyfunction]
fn apply_loss(probs: Vec<f64>, eta: f64) -> PyResult<Vec<f64>> {
    Ok(pc::states::apply_loss(&dist(probs)?, eta).map_err(err)?.probs)
}

/// Convex mixture: weights must sum to 1.
#[pyfunction]
fn mix(weights: Vec<f64>, dists: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let ds: Vec<PhotonNumberDistribution> =
        dists.into_iter().map(PhotonNumberDistribution::from_probs).collect();
    Ok(pc::states::mix(&weights, &ds).map_err(err)?.probs)
}

// ---------------------------------------------------------------------------
// Moments and the amplifier map

/// Input moments {m, s2, g2_pre} of a probability vector.
#[pyfunction]
fn moments(py: Python<'_>, probs: Vec<f64>) -> PyResult<PyObject> {
    to_py(py, &dist(probs)?.moments().map_err(err)?)
}

/// High-gain moment map {mu_rel, sigma2_rel, g2_post} from input mean m
/// and variance s2 (phase-independent input).
#[pyfunction]
fn asymptotic_moments(py: Python<'_>, m: f64, s2: f64) -> PyResult<PyObject> {
    let ms = pc::fock::MomentSummary::from_mean_variance(m, s2).map_err(err)?;
    to_py(py, &pc::opa::asymptotic_moments(&ms))
}

/// Exact output mean photon number for input mean m at the given gain.
#[pyfunction]
#[pyo3(signature = (m, gain=6.5))]
fn amplified_mean(m: f64, gain: f64) -> PyResult<f64> {
    pc::opa::amplified_mean(m, self::gain(gain)?).map_err(err)
}

/// Continuous post-amplification intensity distribution
/// {grid, density, gain} on an auto (or explicit) grid.
#[pyfunction]
#[pyo3(signature = (probs, gain=6.5, n_lo=None, n_hi=None, points=None))]
fn intensity_distribution(
    py: Python<'_>,
    probs: Vec<f64>,
    gain: f64,
    n_lo: Option<f64>,
    n_hi: Option<f64>,
    points: Option<usize>,
) -> PyResult<PyObject> {
    let spec = pc::opa::GridSpec { n_lo, n_hi, points };
    to_py(py, &pc::opa::intensity_distribution(&dist(probs)?, self::gain(gain)?, spec).map_err(err)?)
}

/// Per-pulse intensity samples of the amplified state (deterministic per
/// seed); returns the list of recorded counts.
#[pyfunction]
#[pyo3(signature = (probs, n_pulses, gain=6.5, detection_scale=1.0, seed=0))]
fn sample_pulses(
    probs: Vec<f64>,
    n_pulses: usize,
    gain: f64,
    detection_scale: f64,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let rec = pc::opa::sample_pulses(&dist(probs)?, self::gain(gain)?, n_pulses, detection_scale, seed)
        .map_err(err)?;
    Ok(rec.counts)
}

/// Bootstrap moment estimate of recorded counts:
/// {mean, variance, g2, *_ci, resamples, seed}.
#[pyfunction]
#[pyo3(signature = (counts, seed=0, resamples=1000))]
fn estimate_moments(
    py: Python<'_>,
    counts: Vec<f64>,
    seed: u64,
    resamples: usize,
) -> PyResult<PyObject> {
    let rec = pc::records::PulseRecordSet {
        counts,
        herald: None,
        meta: Default::default(),
    };
    to_py(py, &pc::records::estimate_moments(&rec, seed, resamples).map_err(err)?)
}

/// Full analysis of signal counts against an amplified-vacuum reference:
/// the complete report as a dict (mu_rel, g2, verdict, provenance).
#[pyfunction]
#[pyo3(signature = (signal_counts, vacuum_counts, seed=0, resamples=1000))]
fn analyze_counts(
    py: Python<'_>,
    signal_counts: Vec<f64>,
    vacuum_counts: Vec<f64>,
    seed: u64,
    resamples: usize,
) -> PyResult<PyObject> {
    let signal = pc::records::PulseRecordSet {
        counts: signal_counts,
        herald: None,
        meta: Default::default(),
    };
    let vacuum = pc::records::PulseRecordSet {
        counts: vacuum_counts,
        herald: None,
        meta: Default::default(),
    };
    let opts = pc::pipeline::AnalyzeOptions { seed, resamples, unconditioned: false };
    to_py(py, &pc::pipeline::analyze(&signal, &vacuum, &opts).map_err(err)?)
}

// ---------------------------------------------------------------------------
// Witnesses

/// Classify a (mu_rel, g2) point: {category, margins, confidence_note}.
#[pyfunction]
#[pyo3(signature = (mu_rel, g2, sigma_mu=0.0, sigma_g2=0.0))]
fn classify_moments(
    py: Python<'_>,
    mu_rel: f64,
    g2: f64,
    sigma_mu: f64,
    sigma_g2: f64,
) -> PyResult<PyObject> {
    to_py(py, &pc::witness::classify_moments(mu_rel, g2, sigma_mu, sigma_g2).map_err(err)?)
}

/// Classify a (p0, p1) point: {category, margins, confidence_note}.
#[pyfunction]
#[pyo3(signature = (p0, p1, sigma_p0=0.0, sigma_p1=0.0))]
fn classify_probabilities(
    py: Python<'_>,
    p0: f64,
    p1: f64,
    sigma_p0: f64,
    sigma_p1: f64,
) -> PyResult<PyObject> {
    to_py(py, &pc::witness::classify_probabilities(p0, p1, sigma_p0, sigma_p1).map_err(err)?)
}

/// Tabulate a named boundary curve: {kind, parameter, x, y}.
#[pyfunction]
#[pyo3(signature = (kind, points=1000, param_min=None, param_max=None))]
fn boundary_curve(
    py: Python<'_>,
    kind: &str,
    points: usize,
    param_min: Option<f64>,
    param_max: Option<f64>,
) -> PyResult<PyObject> {
    let kind: pc::witness::CurveKind = kind.parse().map_err(err)?;
    let (lo, hi) = pc::witness::default_curve_span(kind);
    let curve = pc::witness::sample_curve_span(
        kind,
        points,
        param_min.unwrap_or(lo),
        param_max.unwrap_or(hi),
    )
    .map_err(err)?;
    to_py(py, &curve)
}

/// Non-Gaussianity bound on g2 after amplification, at the given mu_rel.
#[pyfunction]
fn ng_bound_post(mu_rel: f64) -> PyResult<f64> {
    pc::witness::ng_bound_post(mu_rel).map_err(err)
}

/// Non-classicality bound on g2 after amplification, at the given mu_rel.
#[pyfunction]
fn nc_bound_post(mu_rel: f64) -> PyResult<f64> {
    pc::witness::nc_bound_post(mu_rel).map_err(err)
}

/// Phase-independent-input floor on g2 after amplification.
#[pyfunction]
fn floor_post(mu_rel: f64) -> PyResult<f64> {
    pc::witness::floor_post(mu_rel).map_err(err)
}

/// Largest input variance compatible with Gaussian phase-independent
/// inputs of mean m; a measured s2 below it certifies non-Gaussianity.
#[pyfunction]
fn ng_bound_moments(m: f64) -> PyResult<f64> {
    pc::witness::ng_bound_moments(m).map_err(err)
}

/// Largest input variance compatible with classical inputs of mean m
/// (the sub-Poissonian bound s2 < m).
#[pyfunction]
fn nc_bound_moments(m: f64) -> f64 {
    pc::witness::nc_bound_moments(m)
}

/// Non-Gaussianity threshold on p1 at the given p0 (input plane).
#[pyfunction]
fn ng_threshold_pre(p0: f64) -> PyResult<f64> {
    pc::witness::ng_threshold_pre(p0).map_err(err)
}

/// Non-classicality bound on p1 at the given p0 (input plane).
#[pyfunction]
fn nc_bound_pre(p0: f64) -> PyResult<f64> {
    pc::witness::nc_bound_pre(p0).map_err(err)
}

// ---------------------------------------------------------------------------
// HBT

/// Expected (Q1, Q2) click rates of a state behind the splitter.
#[pyfunction]
#[pyo3(signature = (probs, t=0.5, p_a=1.0, p_b=1.0))]
fn expected_click_rates(probs: Vec<f64>, t: f64, p_a: f64, p_b: f64) -> PyResult<(f64, f64)> {
    let cfg = pc::hbt::HbtConfig::new(t, p_a, p_b).map_err(err)?;
    pc::hbt::expected_click_rates(&dist(probs)?, &cfg).map_err(err)
}

/// Monte-Carlo HBT run: {q1, q2, n_pulses, counts}.
#[pyfunction]
#[pyo3(signature = (probs, n_pulses, t=0.5, p_a=1.0, p_b=1.0, seed=0))]
fn simulate_clicks(
    py: Python<'_>,
    probs: Vec<f64>,
    n_pulses: u64,
    t: f64,
    p_a: f64,
    p_b: f64,
    seed: u64,
) -> PyResult<PyObject> {
    let cfg = pc::hbt::HbtConfig::new(t, p_a, p_b).map_err(err)?;
    to_py(py, &pc::hbt::simulate_clicks(&dist(probs)?, &cfg, n_pulses, seed).map_err(err)?)
}

/// Invert measured (Q1, Q2) into {p0, p1, p2plus, sigma_*, physical}.
#[pyfunction]
#[pyo3(signature = (q1, q2, t=0.5, p_a=1.0, p_b=1.0, n_pulses=None))]
fn infer_probabilities(
    py: Python<'_>,
    q1: f64,
    q2: f64,
    t: f64,
    p_a: f64,
    p_b: f64,
    n_pulses: Option<u64>,
) -> PyResult<PyObject> {
    let mut stats = pc::hbt::ClickStatistics::from_rates(q1, q2).map_err(err)?;
    stats.n_pulses = n_pulses;
    let cfg = pc::hbt::HbtConfig::new(t, p_a, p_b).map_err(err)?;
    to_py(py, &pc::hbt::infer_probabilities(&stats, &cfg).map_err(err)?)
}

/// Undo a known pre-splitter transmittance t_prime on (p0, p1, p2plus).
#[pyfunction]
fn correct_loss(p0: f64, p1: f64, p2plus: f64, t_prime: f64) -> PyResult<(f64, f64, f64)> {
    pc::hbt::correct_loss(p0, p1, p2plus, t_prime).map_err(err)
}

/// Klyshko heralding efficiency with known-correction factors divided out.
#[pyfunction]
fn heralding_efficiency(
    coinc_per_pulse: f64,
    herald_rate_per_pulse: f64,
    corrections: Vec<f64>,
) -> PyResult<f64> {
    pc::hbt::heralding_efficiency(coinc_per_pulse, herald_rate_per_pulse, &corrections).map_err(err)
}

// ---------------------------------------------------------------------------

#[pymodule]
fn paramp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("DEFAULT_ETA_IDLER", ETA_IDLER_DEFAULT)?;
    m.add(
        "CURVE_KINDS",
        pc::witness::ALL_CURVE_KINDS.iter().map(|k| k.name()).collect::<Vec<_>>(),
    )?;

    m.add_function(wrap_pyfunction!(vacuum_state, m)?)?;
    m.add_function(wrap_pyfunction!(fock_state, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_state, m)?)?;
    m.add_function(wrap_pyfunction!(coherent_state, m)?)?;
    m.add_function(wrap_pyfunction!(heralded_state, m)?)?;
    m.add_function(wrap_pyfunction!(apply_loss, m)?)?;
    m.add_function(wrap_pyfunction!(mix, m)?)?;

    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotic_moments, m)?)?;
    m.add_function(wrap_pyfunction!(amplified_mean, m)?)?;
    m.add_function(wrap_pyfunction!(intensity_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(sample_pulses, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_moments, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_counts, m)?)?;

    m.add_function(wrap_pyfunction!(classify_moments, m)?)?;
    m.add_function(wrap_pyfunction!(classify_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(boundary_curve, m)?)?;
    m.add_function(wrap_pyfunction!(ng_bound_post, m)?)?;
    m.add_function(wrap_pyfunction!(nc_bound_post, m)?)?;
    m.add_function(wrap_pyfunction!(floor_post, m)?)?;
    m.add_function(wrap_pyfunction!(ng_bound_moments, m)?)?;
    m.add_function(wrap_pyfunction!(nc_bound_moments, m)?)?;
    m.add_function(wrap_pyfunction!(ng_threshold_pre, m)?)?;
    m.add_function(wrap_pyfunction!(nc_bound_pre, m)?)?;

    m.add_function(wrap_pyfunction!(expected_click_rates, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_clicks, m)?)?;
    m.add_function(wrap_pyfunction!(infer_probabilities, m)?)?;
    m.add_function(wrap_pyfunction!(correct_loss, m)?)?;
    m.add_function(wrap_pyfunction!(heralding_efficiency, m)?)?;
    Ok(())
}
