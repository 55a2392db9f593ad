use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("pump-atom detuning is zero; the dispersive shift is singular")]
    SingularDetuning,

    #[error("ions {0} and {1} coincide")]
    CoincidentIons(usize, usize),

    #[error("minimizer did not converge after {iterations} iterations (|grad|_inf = {grad_inf:e})")]
    NoConvergence { iterations: usize, grad_inf: f64 },

    #[error("converged to a saddle point (lowest Hessian eigenvalue {lowest_eigenvalue:e})")]
    Saddle { lowest_eigenvalue: f64 },

    #[error("transverse confinement is below the critical value: {0}")]
    BelowCritical(String),

    #[error("could not bracket the structural instability: {0}")]
    BracketFailure(String),

    #[error("cooperativity must be positive")]
    ZeroCooperativity,

    #[error("configuration is mechanically unstable (mode {mode} has curvature {curvature:e})")]
    UnstableConfiguration { mode: usize, curvature: f64 },

    #[error("drift matrix is not Hurwitz (max Re eigenvalue {max_real:e}); no steady state")]
    NoSteadyState { max_real: f64 },

    #[error("covariance matrix is unphysical (min eigenvalue of sigma + i omega/2 is {min_eigenvalue:e})")]
    Unphysical { min_eigenvalue: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
