//! Photon-number statistics of phase-independent quantum optical states
//! before and after phase-sensitive parametric amplification.
//!
//! A phase-sensitive optical parametric amplifier (OPA) with gain `G`
//! stretches one field quadrature by `e^G` while squeezing the conjugate
//! one. Fed with a phase-independent state (vacuum, Fock, thermal, a
//! heralded single photon, ...), the amplified output carries a macroscopic
//! photon number whose *statistics* still remember the quantum character of
//! the input. This crate models that chain end to end:
//!
//! * [`fock`] — truncated photon-number distributions, exact moments and
//!   the normalized second-order correlation `g²`.
//! * [`states`] — constructors for the standard input states, the binomial
//!   loss channel, and a heralded SPDC source model.
//! * [`opa`] — the amplifier: exact mean mapping, the asymptotic
//!   (high-gain) moment map, continuous intensity distributions via
//!   harmonic-oscillator quadrature wavefunctions, and a pulse-by-pulse
//!   Monte-Carlo sampler.
//! * [`witness`] — non-classicality (NC) and non-Gaussianity (NG) boundary
//!   curves in both the probability plane `(p0, p1)` and the moment plane
//!   `(mu_rel, g2)`, plus the classification logic.
//! * [`hbt`] — Hanbury Brown–Twiss click simulation and the inversion that
//!   recovers `(p0, p1, p2+)` from single/double click rates.
//! * [`records`] — per-pulse intensity records with bootstrap moment
//!   estimation.
//! * [`pipeline`] — end-to-end analysis: ingest records, normalize by an
//!   amplified-vacuum reference, classify, sweep source brightness, and
//!   convert measured points back to pre-amplification moments.
//!
//! All randomized operations take explicit seeds and produce identical
//! results regardless of thread count; parallelism is over fixed-size pulse
//! chunks with per-chunk derived streams.

pub mod error;
pub mod fock;
pub mod hbt;
pub mod math;
pub mod opa;
pub mod pipeline;
pub mod records;
pub mod states;
pub mod witness;

mod qho;

pub use error::CoreError;
pub use fock::{MomentSummary, PhotonNumberDistribution, ValidationReport};
pub use opa::{GainSetting, IntensityDistribution};
pub use records::{MomentEstimate, PulseRecordSet};
pub use witness::{VerdictCategory, WitnessVerdict};
