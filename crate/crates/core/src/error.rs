use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A lift was requested across more than a quarter period in one step.
    #[error("lift step too large: torus distance {dist:.3e} exceeds 0.25")]
    StepTooLarge { dist: f64 },

    /// The Green function was evaluated at (or too close to) a lattice point.
    #[error("green function evaluated at a lattice point")]
    SingularPoint,

    /// Cutoff radius outside the admissible range (0, 0.25].
    #[error("cutoff radius {0} outside (0, 0.25]")]
    BadCutoff(f64),

    /// Two vortices closer than the admissible separation.
    #[error("vortex collision: pair separation {sep:.3e} below {limit:.3e}")]
    Collision { sep: f64, limit: f64 },

    /// Loop circulations of a current field are not near multiples of 2*pi.
    #[error("inconsistent circulation: worst loop defect {0:.3e} (tolerance 1e-2)")]
    InconsistentCirculation(f64),

    /// Vortex core size below grid resolution.
    #[error("core size {eps:.3e} unresolved on grid spacing {h:.3e} (need eps >= 2h)")]
    CoreUnresolved { eps: f64, h: f64 },

    /// Newton iteration failed to converge.
    #[error("newton iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    /// The integrator could not find an admissible step size.
    #[error("integration step failure at t={t:.6}: step size underflow")]
    StepFailure { t: f64 },

    /// A parameter violated a precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Malformed or truncated table cache.
    #[error("bad green table cache: {0}")]
    BadCache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
