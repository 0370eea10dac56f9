use thiserror::Error;

pub type Result<T> = std::result::Result<T, SweepError>;

#[derive(Debug, Clone, Error)]
pub enum SweepError {
    #[error("time {t} outside the admissible interval [0, 1]")]
    TimeOutOfRange { t: f64 },

    #[error("parameters ({u}, {v}) outside the surface domain")]
    OutOfDomain { u: f64, v: f64 },

    #[error("surface is not regular at ({u}, {v}): |S_u x S_v| = {norm:e}")]
    DegenerateSurface { u: f64, v: f64, norm: f64 },

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),

    #[error("singular Gram matrix at ({u}, {v}, {t})")]
    SingularGram { u: f64, v: f64, t: f64 },

    #[error("degenerate sweep: {0}")]
    DegenerateSweep(String),

    #[error("frame degenerate at ({u}, {v}, {t}): (f_u, f_v) vanishes")]
    FrameDegenerate { u: f64, v: f64, t: f64 },

    #[error("point ({u}, {v}, {t}) is off the funnel: |f| = {residual:e}")]
    OffFunnel { u: f64, v: f64, t: f64, residual: f64 },

    #[error("no sign change of the funnel function at t = {t}")]
    SeedNotFound { t: f64 },

    #[error("trace failed at t = {t} after {} points: {reason}", partial.len())]
    TraceFailed {
        t: f64,
        reason: String,
        /// Parameter-space points traced before the failure.
        partial: Vec<[f64; 2]>,
    },

    #[error("{what}: Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NewtonDiverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
        last: [f64; 2],
    },

    #[error("{what}: singular linear system")]
    SingularSystem { what: &'static str },

    #[error("contact topology changes between t = {t0} and t = {t1} ({n0} vs {n1} components)")]
    TopologyChange { t0: f64, t1: f64, n0: usize, n1: usize },

    #[error("trajectory is not a pure translation")]
    NotTranslational,

    #[error("curvature formula degenerate: vanishing denominator")]
    CurvatureDegenerate,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
