//! Error type shared by all numerical modules.

use thiserror::Error;

/// Failures surfaced by the geometry, envelope, solver and diagnostics code.
///
/// All of these indicate a violated numerical contract (bad inputs, grids too
/// coarse for the requested accuracy, wavepacket escaping the trusted region),
/// not programmer errors.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("domain wall gradient vanishes (|grad kappa| = {magnitude:.3e}) at ({x:.6}, {y:.6})")]
    DegenerateGradient { x: f64, y: f64, magnitude: f64 },

    #[error("wall evaluation produced a non-finite value at ({x:.6}, {y:.6})")]
    NonFiniteWall { x: f64, y: f64 },

    #[error("Newton projection onto the interface failed to converge from ({x:.6}, {y:.6}) after {iterations} iterations (residual {residual:.3e})")]
    ProjectionFailed {
        x: f64,
        y: f64,
        iterations: usize,
        residual: f64,
    },

    #[error("invalid step or sample spacing: {0}")]
    InvalidStep(String),

    #[error("quadrature/FFT grid too coarse: {0}")]
    GridResolution(String),

    #[error("the two dispersion-rate formulas disagree by {mismatch:.3e} at t = {t:.6}")]
    DispersionRouteMismatch { t: f64, mismatch: f64 },

    #[error("requested time {t:.6} lies outside the sampled track [{t0:.6}, {t1:.6}]")]
    TimeOutOfRange { t: f64, t0: f64, t1: f64 },

    #[error("wavepacket mass outside the assembly window: {fraction:.3e} (limit {limit:.1e})")]
    WindowOverflow { fraction: f64, limit: f64 },

    #[error("wavepacket mass {fraction:.3e} reached the absorbing margin at t = {t:.6}; periodic images would contaminate the run")]
    BoundaryContamination { t: f64, fraction: f64 },

    #[error("grids are incompatible: {0}")]
    GridMismatch(String),

    #[error("field has zero (or non-finite) L2 norm")]
    ZeroNorm,

    #[error("not enough samples for {what}: got {got}, need at least {need}")]
    TooFewSamples {
        what: &'static str,
        got: usize,
        need: usize,
    },

    #[error("power-law fit needs strictly positive data: {0}")]
    NonPositiveData(String),

    #[error("snapshot I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
