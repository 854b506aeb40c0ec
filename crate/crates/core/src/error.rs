//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by curve processing, functional evaluation and the solver.
#[derive(Debug, Error)]
pub enum Error {
    /// A node speed fell below `speed_floor`; the discrete curve is not immersed.
    #[error("curve is not immersed: speed {speed:.3e} at node {node} below floor {floor:.3e}")]
    NonImmersed { node: usize, speed: f64, floor: f64 },

    /// An interior node violates the half-plane positivity required of profile curves.
    #[error("axis violation: gamma1 = {value:.3e} <= 0 at interior node {node}")]
    AxisViolation { node: usize, value: f64 },

    /// Total chord length is too small to reparameterize.
    #[error("degenerate curve: total chord length {length:.3e} below floor")]
    DegenerateLength { length: f64 },

    /// Surface area vanished; ratio functionals are undefined.
    #[error("zero area: A = {area:.3e}")]
    ZeroArea { area: f64 },

    /// Euler-Lagrange residual requested on a curve violating its normalization.
    #[error("constraint violated: |A-1| = {area_err:.3e}, |V-target| = {vol_err:.3e}")]
    ConstraintViolated { area_err: f64, vol_err: f64 },

    /// The (scale, normal displacement) Newton iteration failed to restore the constraints.
    #[error("constraint projection diverged after {iters} Newton steps (residual {residual:.3e})")]
    ProjectionDiverged { iters: usize, residual: f64 },

    /// Backtracking reduced the step below `step_min` without sufficient decrease.
    #[error("line search stalled at step {step:.3e} (iteration {iter})")]
    LineSearchStalled { iter: usize, step: f64 },

    /// The profile curve pinched onto the axis during optimization.
    #[error("neck collapse: min interior gamma1 = {min_gamma1:.3e} at iteration {iter}")]
    NeckCollapse { iter: usize, min_gamma1: f64 },

    /// Graph extraction requested on a window where gamma1 is not strictly monotone.
    #[error("gamma1 is not strictly monotone on the requested window (side {side}, reached r = {reached:.3e}, requested r0 = {requested:.3e})")]
    NotMonotone { side: &'static str, reached: f64, requested: f64 },

    /// The least-squares basis is numerically rank deficient.
    #[error("ill-conditioned fit basis: condition estimate {cond:.3e}")]
    IllConditioned { cond: f64 },

    /// The inverted-catenoid seed self-intersects at build resolution.
    #[error("seed construction failed: {reason}")]
    BuildFailed { reason: String },

    /// No nodes fell inside the neck-detection window.
    #[error("neck window [1/8, 7/8] contains no nodes")]
    WindowEmpty,

    /// Malformed input file or option.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
