//! Numerical toolkit for wave-Klein-Gordon systems on hyperboloidal slices of
//! Minkowski space.
//!
//! The interior of the light cone `K = {|x| < t - 1}` is foliated by the
//! hyperboloids `H_s = {t^2 - |x|^2 = s^2}`. This crate provides:
//!
//! * [`geometry`] -- the foliation, the semi-hyperboloidal frame and its
//!   transition matrices, and chart/frame transformations;
//! * [`fields`] -- the admissible vector fields (translations and Lorentz
//!   boosts) as discrete operators on slice data, with their commutator
//!   coefficient tables;
//! * [`nullstruct`] -- static classification of constant-coefficient
//!   quadratic/cubic interaction terms (symmetry, null conditions,
//!   non-blow-up conditions) with machine-checkable certificates;
//! * [`solver`] -- explicit evolution of the transformed first-order system
//!   along the foliation, with compact support maintained inside the cone;
//! * [`diagnostics`] -- hyperboloidal and curved energies, slice norms,
//!   weighted decay monitors, and energy-identity bookkeeping;
//! * [`verify`] -- empirical-constant measurements for the Sobolev/Hardy
//!   inequalities on hyperboloids, homogeneity bounds, and exact commutator
//!   table checks;
//! * [`report`] -- delimited-text time series, binary slice snapshots, and
//!   machine-readable run summaries.
//!
//! All numerics are generic over the scalar type through the [`Real`] trait;
//! `f64` is the working precision of the shipped binaries and is re-exported
//! as [`Scalar`].

pub mod diagnostics;
pub mod fields;
pub mod geometry;
pub mod grid;
pub mod nullstruct;
pub mod report;
pub mod solver;
pub mod verify;

mod num;

pub use num::Real;

/// Working scalar type used by the command-line tools.
pub type Scalar = f64;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("point (t={t}, r={r}) lies outside the hyperboloidal cone")]
    OutsideCone { t: f64, r: f64 },
    #[error("slice label s={0} below 1: slice does not intersect the cone")]
    SliceBelowCone(f64),
    #[error("time coordinate t={0} must be positive")]
    NonPositiveTime(f64),
    #[error("stencil of half-width {need} exceeds grid margin at index {index:?}")]
    MarginViolation { need: usize, index: [usize; 3] },
    #[error("operation requires a time-derivative co-field that is not present")]
    MissingCoField,
    #[error("coefficient array dimensions inconsistent: {0}")]
    DimensionMismatch(String),
    #[error(
        "quasilinear smallness violated: ||G00|| = {norm} > {limit} at grid point {index:?} (s = {s})"
    )]
    QuasilinearBreakdown {
        norm: f64,
        limit: f64,
        index: [usize; 3],
        s: f64,
    },
    #[error("non-finite field value detected at grid point {index:?} (s = {s})")]
    InstabilityDetected { index: [usize; 3], s: f64 },
    #[error("diagnostic series too short: need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("requested time t0={t0} not covered by stored slices [{lo}, {hi}]")]
    TimeOutOfRange { t0: f64, lo: f64, hi: f64 },
    #[error("slice cadence too coarse for the s-quadrature: {0}")]
    CadenceTooCoarse(String),
    #[error("unknown homogeneous coefficient name: {0}")]
    UnknownCoefficient(String),
    #[error("empty sample set")]
    EmptySample,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
