//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("fields live on different grids ({0} vs {1} points per axis)")]
    GridMismatch(usize, usize),

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("L^p norm requires p >= 1, got {0}")]
    InvalidLpExponent(f64),

    #[error("mollifier radius {epsilon:.3e} under-resolved; minimum is {minimum:.3e} (two grid spacings)")]
    EpsilonUnderResolved { epsilon: f64, minimum: f64 },

    #[error("trajectory sampling too coarse: dt = {dt:.3e} exceeds epsilon/4 = {limit:.3e}")]
    TimeSamplingTooCoarse { dt: f64, limit: f64 },

    #[error("trajectory too short: {0}")]
    TrajectoryTooShort(String),

    #[error("test function support [{lo:.3}, {hi:.3}] inflated by eps = {epsilon:.3} leaves the trajectory time range [{t0:.3}, {t1:.3}]")]
    SupportOutOfRange {
        lo: f64,
        hi: f64,
        epsilon: f64,
        t0: f64,
        t1: f64,
    },

    #[error("scaling sweep needs at least {needed} epsilon values spanning a decade, got {got} over {span:.2} decades")]
    SweepTooNarrow { needed: usize, got: usize, span: f64 },

    #[error("field is constant: no increments to fit")]
    NoIncrements,

    #[error("CFL violation at t = {t:.4}: dt*max|u|/dx = {value:.3} > {limit:.3}")]
    CflViolation { t: f64, value: f64, limit: f64 },

    #[error("density fell below floor {floor:.3e} at t = {t:.4} (min rho = {min_rho:.3e})")]
    DensityFloor { t: f64, min_rho: f64, floor: f64 },

    #[error("pressure projection did not converge after {iters} iterations (residual {residual:.3e})")]
    ProjectionDiverged { iters: usize, residual: f64 },

    #[error("window [{lo:.4}, {hi:.4}] outside trajectory time range [{t0:.4}, {t1:.4}]")]
    WindowOutOfRange { lo: f64, hi: f64, t0: f64, t1: f64 },

    #[error("checkpoint format error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
