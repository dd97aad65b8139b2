//! Non-classicality (NC) and non-Gaussianity (NG) witness boundaries, both
//! before amplification (in the photon-probability plane and the
//! mean/variance plane) and after amplification (in the (μ_rel, g²) plane),
//! plus the classifiers that turn measured points into verdicts.
//!
//! Boundary logic, all for phase-independent states:
//!
//! * **NG, pre, probabilities** — the extremal Gaussian-mixture boundary is
//!   the parametric curve (r ∈ [0, 5])
//!   `p̃₀(r) = exp{−(e^{2r}−1)/2} / cosh r`,
//!   `p̃₁(r) = (e^{4r}−1) · exp{−(e^{2r}−1)/2} / (4 cosh³ r)`;
//!   a measured (p0, p1) with p1 above the curve is non-Gaussian.
//! * **NC, pre, probabilities** — `p1 > −p0 ln p0` is non-classical.
//! * **NG, post, moments** — the squeezed-vacuum trace
//!   `μ̃(r) = e^r cosh 2r`, `g̃²(r) = 3 − 3 sinh²r (sinh 2r + 1)/cosh² 2r`
//!   is the lowest g² any Gaussian phase-independent input reaches at a
//!   given μ_rel; measured g² below it is non-Gaussian.
//! * **NC, post, moments** — coherent inputs give exactly
//!   `g² = 3/2 + 3/μ_rel − 3/(2 μ_rel²)`; below is non-classical.
//! * **Floor, post** — the absolute minimum over all phase-independent
//!   inputs, attained by |0⟩/|1⟩ mixtures on μ_rel ∈ [1,3) and |1⟩/|2⟩
//!   mixtures on [3,5); points below it indicate a phase-dependent input
//!   or corrupted data.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::fock::MomentSummary;
use crate::math::{bisect, ln_cosh};
use crate::opa::asymptotic_moments;

/// Resolution of the pre-amplification NG boundary table.
pub const NG_PRE_TABLE_POINTS: usize = 10_000;
/// Parameter range of the pre-amplification NG boundary table.
pub const NG_PRE_R_MAX: f64 = 5.0;
/// Bisection tolerance (in r) for inverting μ̃(r) = e^r cosh 2r.
pub const INVERSION_TOL: f64 = 1e-10;

/// Strictness epsilon for witness-side tests: a point must clear a boundary
/// by more than this to be classified beyond it, so states that sit exactly
/// on a boundary (e.g. coherent inputs on the NC curve, up to float
/// rounding) land on the conservative side.
const TIE_EPS: f64 = 1e-12;

/// Classification outcome of a witness test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictCategory {
    /// Beyond the Gaussian-mixture boundary (implies non-classical).
    NonGaussian,
    /// Beyond the classical boundary but not the Gaussian one.
    NonClassicalOnly,
    /// Consistent with classical (coherent-mixture) statistics.
    Classical,
    /// Below the minimum reachable by any phase-independent input.
    BelowPhaseIndependentFloor,
    /// Outside the physical region (e.g. p0 + p1 > 1 beyond uncertainty).
    NonPhysical,
}

impl VerdictCategory {
    fn human(self) -> &'static str {
        match self {
            VerdictCategory::NonGaussian => "non-Gaussian",
            VerdictCategory::NonClassicalOnly => "non-classical",
            VerdictCategory::Classical => "classical",
            VerdictCategory::BelowPhaseIndependentFloor => "below the phase-independent floor",
            VerdictCategory::NonPhysical => "non-physical",
        }
    }
}

impl fmt::Display for VerdictCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VerdictCategory::NonGaussian => "NonGaussian",
            VerdictCategory::NonClassicalOnly => "NonClassicalOnly",
            VerdictCategory::Classical => "Classical",
            VerdictCategory::BelowPhaseIndependentFloor => "BelowPhaseIndependentFloor",
            VerdictCategory::NonPhysical => "NonPhysical",
        };
        f.write_str(s)
    }
}

/// Signed distances from each boundary, positive on the witnessed side.
///
/// Units are p1 for the probability witness and g² for the moment witness:
/// `non_gaussian`/`non_classical` are positive when the point is beyond the
/// respective boundary, `floor` is positive when the point is above the
/// phase-independent floor (i.e. physically reachable), and `physical` is
/// `1 − p0 − p1` (positive inside the physical triangle). Fields are `None`
/// where a boundary does not apply (no floor for the probability witness or
/// for μ_rel ≥ 5).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryMargins {
    pub non_gaussian: Option<f64>,
    pub non_classical: Option<f64>,
    pub floor: Option<f64>,
    pub physical: Option<f64>,
}

/// Outcome of classifying a measured point against the witness boundaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessVerdict {
    pub category: VerdictCategory,
    pub margins: BoundaryMargins,
    /// States whether the deciding margin exceeds the supplied 1σ
    /// uncertainty ("inconclusive" when it does not), and flags points on
    /// the physical boundary.
    pub confidence_note: String,
}

/// The named boundary curves, as plotted point sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveKind {
    #[serde(rename = "NG_pre_p0p1")]
    NgPreP0P1,
    #[serde(rename = "NC_pre_p0p1")]
    NcPreP0P1,
    #[serde(rename = "NG_post_mu_g2")]
    NgPostMuG2,
    #[serde(rename = "NC_post_mu_g2")]
    NcPostMuG2,
    #[serde(rename = "Floor_post_mu_g2")]
    FloorPostMuG2,
    #[serde(rename = "NG_pre_moments")]
    NgPreMoments,
    #[serde(rename = "NC_pre_moments")]
    NcPreMoments,
}

/// All curve kinds, in presentation order.
pub const ALL_CURVE_KINDS: [CurveKind; 7] = [
    CurveKind::NgPreP0P1,
    CurveKind::NcPreP0P1,
    CurveKind::NgPostMuG2,
    CurveKind::NcPostMuG2,
    CurveKind::FloorPostMuG2,
    CurveKind::NgPreMoments,
    CurveKind::NcPreMoments,
];

impl CurveKind {
    /// Stable string name (also the `--kind` CLI token).
    pub fn name(self) -> &'static str {
        match self {
            CurveKind::NgPreP0P1 => "NG_pre_p0p1",
            CurveKind::NcPreP0P1 => "NC_pre_p0p1",
            CurveKind::NgPostMuG2 => "NG_post_mu_g2",
            CurveKind::NcPostMuG2 => "NC_post_mu_g2",
            CurveKind::FloorPostMuG2 => "Floor_post_mu_g2",
            CurveKind::NgPreMoments => "NG_pre_moments",
            CurveKind::NcPreMoments => "NC_pre_moments",
        }
    }
}

impl fmt::Display for CurveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl CurveKind {
    /// Short aliases accepted on the command line.
    fn alias(self) -> &'static str {
        match self {
            CurveKind::NgPreP0P1 => "NG_pre",
            CurveKind::NcPreP0P1 => "NC_pre",
            CurveKind::NgPostMuG2 => "NG_post",
            CurveKind::NcPostMuG2 => "NC_post",
            CurveKind::FloorPostMuG2 => "Floor_post",
            CurveKind::NgPreMoments => "NG_moments",
            CurveKind::NcPreMoments => "NC_moments",
        }
    }
}

impl FromStr for CurveKind {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        ALL_CURVE_KINDS
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s) || k.alias().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<&str> = ALL_CURVE_KINDS.iter().map(|k| k.name()).collect();
                CoreError::invalid(format!(
                    "unknown curve kind {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// A sampled boundary curve: `parameter[i]` maps to the plane point
/// `(x[i], y[i])`. For the invertible kinds (NG_post, NC_post, Floor) `x`
/// is strictly monotone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub kind: CurveKind,
    pub parameter: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl BoundaryCurve {
    /// Write as CSV `param,x,y` with a `# kind=...` header comment.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# kind={}", self.kind.name())?;
        writeln!(w, "param,x,y")?;
        for i in 0..self.parameter.len() {
            writeln!(w, "{},{},{}", self.parameter[i], self.x[i], self.y[i])?;
        }
        Ok(())
    }
}

/// The extremal Gaussian-mixture point (p̃₀, p̃₁) at curve parameter `r`.
///
/// Uses the identity `¼(e^{4r}−1)(1−tanh r) = (e^{2r}−1)/2` and log-domain
/// assembly so the curve is evaluable over all of `r ∈ [0, 5]`; beyond
/// r ≈ 3.6 both probabilities underflow f64 to 0, which is why the
/// parameter range is capped at 5.
pub fn ng_curve_pre(r: f64) -> Result<(f64, f64)> {
    if !(0.0..=NG_PRE_R_MAX).contains(&r) {
        return Err(CoreError::domain(format!(
            "NG boundary parameter r must be in [0, {NG_PRE_R_MAX}], got {r}"
        )));
    }
    let a = 0.5 * (2.0 * r).exp_m1();
    let lc = ln_cosh(r);
    let p0 = (-a - lc).exp();
    // ln(e^{4r} − 1) via exp_m1; at r = 0 this is −∞ and p1 = 0 exactly.
    let p1 = ((4.0 * r).exp_m1().ln() - a - 3.0 * lc - 4.0_f64.ln()).exp();
    Ok((p0, p1))
}

/// Largest single-photon probability compatible with classical states at
/// vacuum probability `p0`: `−p0 ln p0`.
pub fn nc_bound_pre(p0: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 <= 1.0) {
        return Err(CoreError::domain(format!("p0 must be in (0, 1], got {p0}")));
    }
    Ok(-(p0 * p0.ln()))
}

/// μ̃(r) = e^r cosh 2r, the relative mean along the squeezed-vacuum trace.
pub fn mu_tilde(r: f64) -> f64 {
    r.exp() * (2.0 * r).cosh()
}

/// g̃²(r) = 3 − 3 sinh²r (sinh 2r + 1)/cosh² 2r along the same trace.
pub fn g2_tilde(r: f64) -> f64 {
    let sh = r.sinh();
    let c2 = (2.0 * r).cosh();
    3.0 - 3.0 * sh * sh * ((2.0 * r).sinh() + 1.0) / (c2 * c2)
}

/// Invert μ̃(r) = mu_rel for r ∈ [0, 20] by bisection (log form, stable for
/// large μ). mu_rel beyond μ̃(20) ≈ 5.7e25 clamps to r = 20, where g̃² is
/// within 1e-34 of its 3/2 asymptote.
fn invert_mu_tilde(mu_rel: f64) -> Result<f64> {
    if mu_rel == 1.0 {
        return Ok(0.0);
    }
    if mu_rel >= mu_tilde(20.0) {
        return Ok(20.0);
    }
    let target = mu_rel.ln();
    bisect(|r| r + ln_cosh(2.0 * r) - target, 0.0, 20.0, INVERSION_TOL)
}

/// Lowest g² reachable by Gaussian phase-independent inputs at `mu_rel`;
/// measured g² below this threshold certifies non-Gaussianity.
pub fn ng_bound_post(mu_rel: f64) -> Result<f64> {
    if !(mu_rel >= 1.0) {
        return Err(CoreError::domain(format!(
            "mu_rel must be >= 1 (mu_rel = 2m+1 for any phase-independent input), got {mu_rel}"
        )));
    }
    Ok(g2_tilde(invert_mu_tilde(mu_rel)?))
}

/// Lowest g² reachable by classical (coherent-mixture) inputs at `mu_rel`:
/// `3/2 + 3/μ − 3/(2μ²)`, attained exactly by coherent inputs.
pub fn nc_bound_post(mu_rel: f64) -> Result<f64> {
    if !(mu_rel >= 1.0) {
        return Err(CoreError::domain(format!(
            "mu_rel must be >= 1 (mu_rel = 2m+1 for any phase-independent input), got {mu_rel}"
        )));
    }
    Ok(1.5 + 3.0 / mu_rel - 1.5 / (mu_rel * mu_rel))
}

/// Absolute minimum of g² over all phase-independent inputs at `mu_rel`,
/// attained by |0⟩/|1⟩ mixtures on [1,3) and |1⟩/|2⟩ mixtures on [3,5).
/// Points below the floor indicate a phase-dependent input (or bad data).
pub fn floor_post(mu_rel: f64) -> Result<f64> {
    if !(1.0..5.0).contains(&mu_rel) {
        return Err(CoreError::domain(format!(
            "the phase-independent floor is defined for mu_rel in [1, 5), got {mu_rel}"
        )));
    }
    let (m, w) = if mu_rel < 3.0 {
        let w = (mu_rel - 1.0) / 2.0;
        (w, w)
    } else {
        let w = (mu_rel - 3.0) / 2.0;
        (1.0 + w, w)
    };
    let ms = MomentSummary::from_mean_variance(m, w * (1.0 - w))?;
    Ok(asymptotic_moments(&ms).g2_post)
}

/// Largest pre-amplification variance compatible with Gaussian
/// phase-independent inputs of mean `m`; measured s² below certifies
/// non-Gaussianity. Obtained from the post-amplification boundary through
/// the moment map: with r* solving μ̃(r*) = 2m+1,
/// `s²_thr = [(g̃²(r*) − 1)(2m+1)²/2 − 1 − m − m²] / 3`.
pub fn ng_bound_moments(m: f64) -> Result<f64> {
    if !(m >= 0.0) {
        return Err(CoreError::domain(format!("mean must be >= 0, got {m}")));
    }
    let mu = 2.0 * m + 1.0;
    let g = g2_tilde(invert_mu_tilde(mu)?);
    Ok(((g - 1.0) * mu * mu / 2.0 - 1.0 - m - m * m) / 3.0)
}

/// Largest pre-amplification variance compatible with classical inputs of
/// mean `m` (the anti-bunching bound s² < m, i.e. g² < 1).
pub fn nc_bound_moments(m: f64) -> f64 {
    m
}

struct NgPreTable {
    /// Ascending, strictly increasing p0 (underflowed rows dropped).
    p0: Vec<f64>,
    p1: Vec<f64>,
}

static NG_PRE_TABLE: OnceLock<NgPreTable> = OnceLock::new();

/// Dense tabulation of the pre-amplification NG curve, ordered by p0.
/// p̃₀(r) is strictly decreasing on [0, 5], so the curve is a function of
/// p0 and a monotone table supports direct binary-search inversion.
fn ng_pre_table() -> &'static NgPreTable {
    NG_PRE_TABLE.get_or_init(|| {
        let n = NG_PRE_TABLE_POINTS;
        let mut p0 = Vec::with_capacity(n);
        let mut p1 = Vec::with_capacity(n);
        for i in (0..n).rev() {
            let r = NG_PRE_R_MAX * i as f64 / (n - 1) as f64;
            let (a, b) = ng_curve_pre(r).expect("r within table range");
            // keep only the strictly increasing (non-underflowed) part
            if a > 0.0 && p0.last().is_none_or(|&last| a > last) {
                p0.push(a);
                p1.push(b);
            }
        }
        NgPreTable { p0, p1 }
    })
}

/// NG threshold in p1 at vacuum probability `p0 ∈ [0, 1]` by linear
/// interpolation in the dense curve table; queries below the smallest
/// tabulated p0 clamp to the first row (where the threshold has already
/// underflowed to ~0, the correct deep-curve limit).
pub fn ng_threshold_pre(p0: f64) -> Result<f64> {
    Ok(ng_lookup(p0)?.0)
}

/// Returns (threshold, local slope d threshold / d p0).
fn ng_lookup(p0: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&p0) {
        return Err(CoreError::invalid(format!("p0 must be in [0, 1], got {p0}")));
    }
    let t = ng_pre_table();
    if p0 <= t.p0[0] {
        return Ok((t.p1[0], 0.0));
    }
    let last = t.p0.len() - 1;
    if p0 >= t.p0[last] {
        let slope = (t.p1[last] - t.p1[last - 1]) / (t.p0[last] - t.p0[last - 1]);
        return Ok((t.p1[last], slope));
    }
    let hi = t.p0.partition_point(|&v| v < p0).max(1);
    let (x0, x1) = (t.p0[hi - 1], t.p0[hi]);
    let (y0, y1) = (t.p1[hi - 1], t.p1[hi]);
    let slope = (y1 - y0) / (x1 - x0);
    Ok((y0 + slope * (p0 - x0), slope))
}

fn check_sigma(name: &str, sigma: f64) -> Result<()> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(CoreError::invalid(format!(
            "{name} must be a finite value >= 0, got {sigma}"
        )));
    }
    Ok(())
}

/// Render the confidence note for the deciding boundary.
fn confidence_note(
    category: VerdictCategory,
    boundary: &str,
    margin: f64,
    sigma: f64,
    unit: &str,
    on_physical_boundary: bool,
) -> String {
    let mut note = if margin.abs() <= sigma {
        format!(
            "inconclusive: {boundary} margin {margin:+.4} {unit} is within 1 sigma ({sigma:.4})"
        )
    } else if sigma > 0.0 {
        format!("{boundary} margin {margin:+.4} {unit} exceeds 1 sigma ({sigma:.4})")
    } else {
        format!("{boundary} margin {margin:+.4} {unit} (no uncertainties supplied)")
    };
    if on_physical_boundary && category != VerdictCategory::NonPhysical {
        note.push_str(&format!(
            "; at the boundary between {} and non-physical (p0 + p1 = 1 within uncertainty)",
            category.human()
        ));
    }
    note
}

/// Classify a measured (p0, p1) point with 1σ uncertainties against the
/// pre-amplification probability witnesses.
pub fn classify_probabilities(
    p0: f64,
    p1: f64,
    sigma_p0: f64,
    sigma_p1: f64,
) -> Result<WitnessVerdict> {
    for (name, v) in [("p0", p0), ("p1", p1)] {
        if !v.is_finite() || !(0.0..=1.0).contains(&v) {
            return Err(CoreError::invalid(format!("{name} must be in [0, 1], got {v}")));
        }
    }
    check_sigma("sigma_p0", sigma_p0)?;
    check_sigma("sigma_p1", sigma_p1)?;

    let sigma_sum = sigma_p0.hypot(sigma_p1);
    let physical = 1.0 - p0 - p1;
    let non_physical = physical < -(sigma_sum + TIE_EPS);
    let on_boundary = physical.abs() <= sigma_sum.max(1e-9);

    let (ng_thr, ng_slope) = ng_lookup(p0)?;
    let ng_margin = p1 - ng_thr;
    let sigma_ng = sigma_p1.hypot(ng_slope * sigma_p0);

    // −p0 ln p0 → 0 as p0 → 0; slope is −(ln p0 + 1)
    let (nc_thr, nc_slope) = if p0 > 0.0 {
        (-(p0 * p0.ln()), -(p0.ln() + 1.0))
    } else {
        (0.0, 0.0)
    };
    let nc_margin = p1 - nc_thr;
    let sigma_nc = sigma_p1.hypot(nc_slope * sigma_p0);

    let category = if non_physical {
        VerdictCategory::NonPhysical
    } else if ng_margin > TIE_EPS {
        VerdictCategory::NonGaussian
    } else if nc_margin > TIE_EPS {
        VerdictCategory::NonClassicalOnly
    } else {
        VerdictCategory::Classical
    };

    let (boundary, margin, sigma) = match category {
        VerdictCategory::NonPhysical => ("physical", physical, sigma_sum),
        VerdictCategory::NonGaussian => ("non-Gaussian", ng_margin, sigma_ng),
        // for Classical the nearest boundary is the NC one (it lies below
        // the NG curve everywhere)
        _ => ("non-classical", nc_margin, sigma_nc),
    };

    Ok(WitnessVerdict {
        category,
        margins: BoundaryMargins {
            non_gaussian: Some(ng_margin),
            non_classical: Some(nc_margin),
            floor: None,
            physical: Some(physical),
        },
        confidence_note: confidence_note(category, boundary, margin, sigma, "in p1", on_boundary),
    })
}

/// Classify a measured (μ_rel, g²) point with 1σ uncertainties against the
/// post-amplification moment witnesses.
pub fn classify_moments(
    mu_rel: f64,
    g2: f64,
    sigma_mu: f64,
    sigma_g2: f64,
) -> Result<WitnessVerdict> {
    if !mu_rel.is_finite() || !g2.is_finite() {
        return Err(CoreError::invalid(format!(
            "mu_rel and g2 must be finite, got ({mu_rel}, {g2})"
        )));
    }
    if g2 < 0.0 {
        return Err(CoreError::invalid(format!("g2 must be >= 0, got {g2}")));
    }
    check_sigma("sigma_mu", sigma_mu)?;
    check_sigma("sigma_g2", sigma_g2)?;
    if !(mu_rel >= 1.0) {
        return Err(CoreError::domain(format!(
            "mu_rel must be >= 1 (mu_rel = 2m+1 for any phase-independent input), got {mu_rel}"
        )));
    }

    // local boundary slopes in μ, for propagating sigma_mu into g² units
    let slope = |f: &dyn Fn(f64) -> Result<f64>, lo: f64, hi: f64| -> f64 {
        let h = 1e-5 * mu_rel.max(1.0);
        let a = (mu_rel - h).max(lo);
        let b = (mu_rel + h).min(hi);
        match (f(a), f(b)) {
            (Ok(fa), Ok(fb)) if b > a => (fb - fa) / (b - a),
            _ => 0.0,
        }
    };

    let ng_thr = ng_bound_post(mu_rel)?;
    let nc_thr = nc_bound_post(mu_rel)?;
    let ng_margin = ng_thr - g2;
    let nc_margin = nc_thr - g2;
    let sigma_ng = sigma_g2.hypot(slope(&ng_bound_post, 1.0, f64::INFINITY) * sigma_mu);
    let sigma_nc = sigma_g2.hypot(slope(&nc_bound_post, 1.0, f64::INFINITY) * sigma_mu);

    // the floor is only defined up to μ_rel = 5; beyond it no check applies
    let floor = if mu_rel < 5.0 { Some(floor_post(mu_rel)?) } else { None };
    let floor_margin = floor.map(|f| g2 - f);
    let sigma_floor = floor
        .map(|_| sigma_g2.hypot(slope(&floor_post, 1.0, 5.0 - 1e-9) * sigma_mu))
        .unwrap_or(0.0);

    let category = if floor_margin.is_some_and(|fm| fm < -TIE_EPS) {
        VerdictCategory::BelowPhaseIndependentFloor
    } else if ng_margin > TIE_EPS {
        VerdictCategory::NonGaussian
    } else if nc_margin > TIE_EPS {
        VerdictCategory::NonClassicalOnly
    } else {
        VerdictCategory::Classical
    };

    let (boundary, margin, sigma) = match category {
        VerdictCategory::BelowPhaseIndependentFloor => {
            ("phase-independent floor", floor_margin.unwrap_or(0.0), sigma_floor)
        }
        VerdictCategory::NonGaussian => ("non-Gaussian", ng_margin, sigma_ng),
        _ => ("non-classical", nc_margin, sigma_nc),
    };

    Ok(WitnessVerdict {
        category,
        margins: BoundaryMargins {
            non_gaussian: Some(ng_margin),
            non_classical: Some(nc_margin),
            floor: floor_margin,
            physical: None,
        },
        confidence_note: confidence_note(category, boundary, margin, sigma, "in g2", false),
    })
}

/// Default parameter span for each curve kind: the r range for the
/// r-parametrized kinds, the plotted axis range otherwise.
pub fn default_curve_span(kind: CurveKind) -> (f64, f64) {
    match kind {
        CurveKind::NgPreP0P1 => (0.0, NG_PRE_R_MAX),
        CurveKind::NcPreP0P1 => (1e-6, 1.0),
        CurveKind::NgPostMuG2 => (0.0, 2.0),
        CurveKind::NcPostMuG2 => (1.0, 6.0),
        CurveKind::FloorPostMuG2 => (1.0, 5.0 - 1e-9),
        CurveKind::NgPreMoments | CurveKind::NcPreMoments => (0.0, 3.0),
    }
}

/// Sample a boundary curve on its default parameter span.
pub fn sample_curve(kind: CurveKind, points: usize) -> Result<BoundaryCurve> {
    let (lo, hi) = default_curve_span(kind);
    sample_curve_span(kind, points, lo, hi)
}

/// Sample a boundary curve on an explicit parameter span (r for the
/// parametric kinds, p0/μ_rel/m for the rest); the span must stay inside
/// the kind's mathematical domain.
pub fn sample_curve_span(
    kind: CurveKind,
    points: usize,
    lo: f64,
    hi: f64,
) -> Result<BoundaryCurve> {
    if points < 2 {
        return Err(CoreError::invalid("a curve needs at least 2 points"));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(CoreError::invalid(format!("bad parameter span [{lo}, {hi}]")));
    }
    let param: Vec<f64> = (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = match kind {
        CurveKind::NgPreP0P1 => {
            let pts: Vec<(f64, f64)> =
                param.iter().map(|&r| ng_curve_pre(r)).collect::<Result<_>>()?;
            (pts.iter().map(|p| p.0).collect(), pts.iter().map(|p| p.1).collect())
        }
        CurveKind::NcPreP0P1 => {
            let y = param.iter().map(|&p| nc_bound_pre(p)).collect::<Result<_>>()?;
            (param.clone(), y)
        }
        CurveKind::NgPostMuG2 => {
            if lo < 0.0 {
                return Err(CoreError::domain(format!("r must be >= 0, got {lo}")));
            }
            let x = param.iter().map(|&r| mu_tilde(r)).collect();
            let y = param.iter().map(|&r| g2_tilde(r)).collect();
            (x, y)
        }
        CurveKind::NcPostMuG2 => {
            let y = param.iter().map(|&mu| nc_bound_post(mu)).collect::<Result<_>>()?;
            (param.clone(), y)
        }
        CurveKind::FloorPostMuG2 => {
            let y = param.iter().map(|&mu| floor_post(mu)).collect::<Result<_>>()?;
            (param.clone(), y)
        }
        CurveKind::NgPreMoments => {
            let y = param.iter().map(|&m| ng_bound_moments(m)).collect::<Result<_>>()?;
            (param.clone(), y)
        }
        CurveKind::NcPreMoments => {
            let y = param.iter().map(|&m| nc_bound_moments(m)).collect();
            (param.clone(), y)
        }
    };
    Ok(BoundaryCurve { kind, parameter: param, x, y })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ng_curve_pre_endpoints_and_frozen_point() {
        let (p0, p1) = ng_curve_pre(0.0).unwrap();
        assert_eq!((p0, p1), (1.0, 0.0));
        let (p0, p1) = ng_curve_pre(0.2).unwrap();
        assert!((p0 - 0.76660744017661035).abs() < 1e-13, "{p0}");
        assert!((p1 - 0.22572708348275721).abs() < 1e-13, "{p1}");
        assert!(ng_curve_pre(-0.1).is_err());
        assert!(ng_curve_pre(5.1).is_err());
    }

    #[test]
    fn ng_curve_pre_maximum_single_photon_probability() {
        // the analytic maximizer of p̃₁ is r = arctanh(1/2)
        let r_star = 0.5_f64.atanh();
        assert!((r_star - 0.54930614433405485).abs() < 1e-15);
        let (p0, p1) = ng_curve_pre(r_star).unwrap();
        assert!((p1 - 0.47788941237673797).abs() < 1e-13, "{p1}");
        assert!((p0 - 0.31859294158449198).abs() < 1e-13, "{p0}");
        // grid scan stays below the analytic maximum
        let scan_max = (0..20_000)
            .map(|i| ng_curve_pre(5.0 * i as f64 / 19_999.0).unwrap().1)
            .fold(0.0, f64::max);
        assert!(scan_max <= p1 + 1e-12);
        assert!(scan_max > p1 - 1e-7);
    }

    #[test]
    fn ng_curve_underflows_deep_in_the_tail() {
        let (p0, p1) = ng_curve_pre(5.0).unwrap();
        assert_eq!((p0, p1), (0.0, 0.0));
        let (p0, p1) = ng_curve_pre(3.0).unwrap();
        assert!(p0 > 0.0 && p1 > 0.0);
    }

    #[test]
    fn nc_bound_pre_known_values() {
        assert_eq!(nc_bound_pre(1.0).unwrap(), 0.0);
        let e_inv = (-1.0_f64).exp();
        assert!((nc_bound_pre(e_inv).unwrap() - e_inv).abs() < 1e-15);
        assert!((nc_bound_pre(0.5).unwrap() - 0.34657359027997265).abs() < 1e-16);
        assert!((nc_bound_pre(0.715).unwrap() - 0.23986300644601252).abs() < 1e-15);
        assert!(nc_bound_pre(0.0).is_err());
        assert!(nc_bound_pre(1.2).is_err());
    }

    #[test]
    fn ng_bound_post_endpoint_and_frozen_inverse() {
        assert_eq!(ng_bound_post(1.0).unwrap(), 3.0);
        let g = ng_bound_post(10.226708182179555).unwrap();
        assert!((g - 1.6455925430774164).abs() < 1e-8, "{g}");
        assert!(ng_bound_post(0.999).unwrap_err().is_domain());
    }

    #[test]
    fn ng_bound_post_round_trips_the_parametric_curve() {
        for (r, mu, g2) in [
            (0.01, 1.0102521838513425, 2.999694111771449),
            (0.1, 1.1273481128059813, 2.9652483263355808),
            (0.5, 2.5441098650253491, 2.2558203893384233),
            (1.0, 10.226708182179555, 1.6455925430774164),
            (2.0, 201.78206438798587, 1.5029806358632214),
            (5.0, 1634508.6896050288, 1.5000000185498211),
        ] {
            assert!((mu_tilde(r) - mu).abs() < 1e-9 * mu, "mu_tilde({r})");
            assert!((g2_tilde(r) - g2).abs() < 1e-12, "g2_tilde({r})");
            assert!((ng_bound_post(mu).unwrap() - g2).abs() < 1e-8, "inverse at r={r}");
        }
    }

    #[test]
    fn ng_bound_post_large_mu_asymptote() {
        // g̃² ≈ 3/2 + 9 e^{−4r} at large r
        for r in [3.0, 4.0] {
            let thr = ng_bound_post(mu_tilde(r)).unwrap();
            let excess = thr - 1.5;
            assert!((excess / (9.0 * (-4.0 * r).exp()) - 1.0).abs() < 1e-2, "r={r}: {excess}");
        }
        let far = ng_bound_post(1e12).unwrap();
        assert!(far > 1.5 && far < 1.5 + 1e-6);
        // clamp beyond the bisection bracket
        assert!((ng_bound_post(1e30).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn ng_bound_post_is_strictly_decreasing() {
        let mut prev = ng_bound_post(1.0).unwrap();
        for i in 1..200 {
            let mu = 1.0 + 0.12 * i as f64;
            let v = ng_bound_post(mu).unwrap();
            assert!(v < prev, "not decreasing at mu={mu}");
            prev = v;
        }
    }

    #[test]
    fn nc_bound_post_known_values() {
        assert_eq!(nc_bound_post(1.0).unwrap(), 3.0);
        assert!((nc_bound_post(3.0).unwrap() - 7.0 / 3.0).abs() < 1e-15);
        assert!((nc_bound_post(1e9).unwrap() - 1.5).abs() < 1e-8);
        assert!(nc_bound_post(0.5).unwrap_err().is_domain());
    }

    #[test]
    fn floor_post_known_values() {
        assert_eq!(floor_post(1.0).unwrap(), 3.0);
        assert!((floor_post(2.0).unwrap() - 2.25).abs() < 1e-15);
        assert!((floor_post(3.0).unwrap() - 5.0 / 3.0).abs() < 1e-15);
        assert!((floor_post(1.66).unwrap() - 2.5257657134562346).abs() < 1e-13);
        assert!(floor_post(4.999).is_ok());
        assert!(floor_post(0.99).unwrap_err().is_domain());
        assert!(floor_post(5.0).unwrap_err().is_domain());
    }

    #[test]
    fn floor_is_continuous_at_the_branch_point() {
        let left = floor_post(3.0 - 1e-9).unwrap();
        let right = floor_post(3.0).unwrap();
        assert!((left - right).abs() < 1e-8);
    }

    #[test]
    fn boundary_ordering_is_strict_inside_the_floor_domain() {
        for i in 1..100 {
            let mu = 1.0 + 3.98 * i as f64 / 100.0;
            let f = floor_post(mu).unwrap();
            let ng = ng_bound_post(mu).unwrap();
            let nc = nc_bound_post(mu).unwrap();
            assert!(f < ng && ng < nc && nc < 3.0, "mu={mu}: {f} {ng} {nc}");
        }
    }

    #[test]
    fn ng_bound_moments_endpoints() {
        assert_eq!(ng_bound_moments(0.0).unwrap(), 0.0);
        let thr = ng_bound_moments(1.0).unwrap();
        assert!((thr - 0.69911710989713656).abs() < 1e-8, "{thr}");
        // Fock |1⟩ (s²=0) inside, coherent (s²=1) outside
        assert!(0.0 < thr && thr < 1.0);
        assert!(ng_bound_moments(-0.1).unwrap_err().is_domain());
        assert_eq!(nc_bound_moments(0.7), 0.7);
    }

    #[test]
    fn ng_threshold_pre_matches_frozen_curve_values() {
        // table-interpolation resolution is ~1e-7 at 10^4 points
        assert!((ng_threshold_pre(0.67).unwrap() - 0.30857052537404445).abs() < 1e-6);
        assert!((ng_threshold_pre(0.715).unwrap() - 0.27114916378500035).abs() < 1e-6);
        assert_eq!(ng_threshold_pre(1.0).unwrap(), 0.0);
        // deep-tail clamp: threshold is (sub)denormal, effectively zero
        let deep = ng_threshold_pre(1e-300).unwrap();
        assert!(deep >= 0.0 && deep < 1e-100);
        assert!(ng_threshold_pre(1.5).is_err());
    }

    #[test]
    fn ng_threshold_dominates_nc_bound() {
        // NG curve lies above the classical bound, so NG ⇒ NC
        for i in 1..=999 {
            let p0 = i as f64 / 1000.0;
            let ng = ng_threshold_pre(p0).unwrap();
            let nc = nc_bound_pre(p0).unwrap();
            assert!(ng >= nc - 1e-12, "p0={p0}: ng {ng} < nc {nc}");
        }
    }

    #[test]
    fn classify_probabilities_frozen_examples() {
        // boundary point: p0+p1 = 1 + 2.2e-16 must NOT be non-physical
        let v = classify_probabilities(0.67, 0.33, 0.0, 0.0).unwrap();
        assert_eq!(v.category, VerdictCategory::NonGaussian);
        assert!(
            v.confidence_note.contains("at the boundary between non-Gaussian and non-physical"),
            "{}",
            v.confidence_note
        );
        assert!(v.margins.non_classical.unwrap() > 0.0);

        // on the NC boundary within 0.005
        let v = classify_probabilities(0.715, 0.239, 0.0, 0.0).unwrap();
        assert_eq!(v.category, VerdictCategory::Classical);
        assert!(v.margins.non_classical.unwrap().abs() < 0.005);

        let v = classify_probabilities(0.99, 0.005, 0.0, 0.0).unwrap();
        assert_eq!(v.category, VerdictCategory::Classical);

        // near-ideal heralded single photon
        let v = classify_probabilities(0.48999957, 0.50999998, 0.0, 0.0).unwrap();
        assert_eq!(v.category, VerdictCategory::NonGaussian);
    }

    #[test]
    fn classify_probabilities_non_physical_region() {
        let v = classify_probabilities(0.6, 0.5, 0.0, 0.0).unwrap();
        assert_eq!(v.category, VerdictCategory::NonPhysical);
        assert!((v.margins.physical.unwrap() + 0.1).abs() < 1e-12);
        // large uncertainties absorb the overshoot
        let v = classify_probabilities(0.6, 0.45, 0.05, 0.05).unwrap();
        assert_ne!(v.category, VerdictCategory::NonPhysical);
        assert!(v.confidence_note.contains("boundary"), "{}", v.confidence_note);
    }

    #[test]
    fn classify_probabilities_inconclusive_within_one_sigma() {
        let v = classify_probabilities(0.5, 0.3466, 0.01, 0.01).unwrap();
        assert_eq!(v.category, VerdictCategory::NonClassicalOnly);
        assert!(v.confidence_note.contains("inconclusive"), "{}", v.confidence_note);
    }

    #[test]
    fn classify_probabilities_rejects_bad_inputs() {
        assert!(classify_probabilities(1.2, 0.0, 0.0, 0.0).is_err());
        assert!(classify_probabilities(0.5, -0.1, 0.0, 0.0).is_err());
        assert!(classify_probabilities(0.5, 0.1, -1.0, 0.0).is_err());
        assert!(classify_probabilities(f64::NAN, 0.1, 0.0, 0.0).is_err());
    }

    #[test]
    fn classify_moments_frozen_examples() {
        let v = classify_moments(1.66, 2.58, 0.0, 0.0).unwrap();
        assert_eq!(v.category, VerdictCategory::NonGaussian);
        assert!((v.margins.non_gaussian.unwrap() - (2.640618761213209 - 2.58)).abs() < 1e-9);

        let v = classify_moments(2.0, 1.66, 0.0, 0.0).unwrap();
        assert_eq!(v.category, VerdictCategory::BelowPhaseIndependentFloor);
        assert!(v.margins.floor.unwrap() < 0.0);

        // g² = 3 is thermal-like: classical at any μ_rel
        for mu in [1.0, 1.5, 2.0, 4.0, 9.0] {
            let v = classify_moments(mu, 3.0, 0.0, 0.0).unwrap();
            assert_eq!(v.category, VerdictCategory::Classical, "mu={mu}");
        }

        assert!(classify_moments(0.9, 2.0, 0.0, 0.0).unwrap_err().is_domain());
        assert!(classify_moments(2.0, -0.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn classify_moments_above_floor_domain_has_no_floor_margin() {
        let v = classify_moments(6.0, 1.8, 0.0, 0.0).unwrap();
        assert_eq!(v.category, VerdictCategory::NonClassicalOnly);
        assert!(v.margins.floor.is_none());
    }

    #[test]
    fn classify_moments_flags_small_margins_as_inconclusive() {
        let v = classify_moments(1.66, 2.58, 0.0, 0.07).unwrap();
        assert_eq!(v.category, VerdictCategory::NonGaussian);
        assert!(v.confidence_note.contains("inconclusive"), "{}", v.confidence_note);
        let v = classify_moments(1.66, 2.58, 0.0, 0.01).unwrap();
        assert!(!v.confidence_note.contains("inconclusive"), "{}", v.confidence_note);
    }

    #[test]
    fn coherent_inputs_sit_on_the_nc_boundary() {
        use crate::opa::asymptotic_moments;
        for m in [0.05, 0.3, 1.0, 2.5, 8.0] {
            let am = asymptotic_moments(&MomentSummary::from_mean_variance(m, m).unwrap());
            let v = classify_moments(am.mu_rel, am.g2_post, 0.0, 0.0).unwrap();
            assert_eq!(v.category, VerdictCategory::Classical, "m={m}");
            assert!(v.margins.non_classical.unwrap().abs() < 1e-9, "m={m}");
        }
    }

    #[test]
    fn fock_and_thermal_verdicts() {
        use crate::opa::asymptotic_moments;
        for n in [1.0, 2.0] {
            let am = asymptotic_moments(&MomentSummary::from_mean_variance(n, 0.0).unwrap());
            let v = classify_moments(am.mu_rel, am.g2_post, 0.0, 0.0).unwrap();
            assert_eq!(v.category, VerdictCategory::NonGaussian, "fock {n}");
            assert!(v.margins.non_gaussian.unwrap() > 0.0);
        }
        for nbar in [0.2, 1.0, 4.0] {
            let am = asymptotic_moments(
                &MomentSummary::from_mean_variance(nbar, nbar * nbar + nbar).unwrap(),
            );
            let v = classify_moments(am.mu_rel, am.g2_post, 0.0, 0.0).unwrap();
            assert_eq!(v.category, VerdictCategory::Classical, "thermal {nbar}");
        }
    }

    #[test]
    fn curve_kind_names_round_trip() {
        for kind in ALL_CURVE_KINDS {
            assert_eq!(kind.name().parse::<CurveKind>().unwrap(), kind);
            assert_eq!(kind.alias().parse::<CurveKind>().unwrap(), kind);
        }
        assert_eq!("NG_post".parse::<CurveKind>().unwrap(), CurveKind::NgPostMuG2);
        let err = "NG_bogus".parse::<CurveKind>().unwrap_err();
        assert!(err.to_string().contains("NG_pre_p0p1"), "{err}");
    }

    #[test]
    fn explicit_spans_are_validated() {
        let c = sample_curve_span(CurveKind::NgPostMuG2, 1000, 0.0, 5.0).unwrap();
        assert_eq!(c.parameter.len(), 1000);
        assert_eq!((c.x[0], c.y[0]), (1.0, 3.0));
        assert!((c.x[999] - 1634508.6896050288).abs() < 1e-6 * 1634508.0);
        assert!(sample_curve_span(CurveKind::NgPreP0P1, 10, 0.0, 6.0).is_err());
        assert!(sample_curve_span(CurveKind::FloorPostMuG2, 10, 0.5, 2.0).is_err());
        assert!(sample_curve_span(CurveKind::NgPostMuG2, 10, 2.0, 1.0).is_err());
    }

    #[test]
    fn sampled_curves_are_well_formed() {
        for kind in ALL_CURVE_KINDS {
            let c = sample_curve(kind, 64).unwrap();
            assert_eq!(c.parameter.len(), 64);
            assert_eq!(c.x.len(), 64);
            assert_eq!(c.y.len(), 64);
            assert!(c.parameter.windows(2).all(|w| w[1] > w[0]));
        }
        // invertible kinds have strictly monotone x
        for kind in [CurveKind::NgPostMuG2, CurveKind::NcPostMuG2, CurveKind::FloorPostMuG2] {
            let c = sample_curve(kind, 64).unwrap();
            assert!(c.x.windows(2).all(|w| w[1] > w[0]), "{kind}");
        }
        let c = sample_curve(CurveKind::NgPostMuG2, 5).unwrap();
        assert_eq!((c.parameter[0], c.x[0], c.y[0]), (0.0, 1.0, 3.0));
        assert!(sample_curve(CurveKind::NcPreP0P1, 1).is_err());
    }

    #[test]
    fn curve_csv_has_kind_header() {
        let c = sample_curve(CurveKind::NgPostMuG2, 3).unwrap();
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# kind=NG_post_mu_g2\nparam,x,y\n0,1,3\n"), "{text}");
    }

    #[test]
    fn verdict_serializes_with_category_name() {
        let v = classify_moments(1.66, 2.58, 0.01, 0.02).unwrap();
        let json = serde_json::to_string(&v).unwrap();
        assert!(json.contains("\"category\":\"NonGaussian\""), "{json}");
        let back: WitnessVerdict = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }
}
