//! Linearized photon-phonon fluctuations about an equilibrium: normal
//! modes, drift and diffusion, steady covariance, output spectrum and
//! entanglement.

mod langevin;
mod lineshape;
mod lyapunov;
mod modes;
mod negativity;
mod spectrum;

pub use langevin::{
    drift_diffusion, steady_covariance, steady_state, symplectic_form, uncertainty_margin, GaussianSteadyState,
    LinearizedDynamics, PHYSICALITY_TOL,
};
pub use lineshape::{
    has_fano_line, line_shape, resonances, sideband_shapes, LineShape, Resonance, FANO_CONTRAST, VISIBILITY,
};
pub use lyapunov::{lyapunov_residual, solve_lyapunov, spectral_abscissa};
pub use modes::{couplings, normal_modes, NormalModes};
pub use negativity::{log_negativity, symplectic_eigenvalues, Negativity, Partition};
pub use spectrum::{
    analytic_point, frequency_grid, max_relative_difference, output_spectrum_analytic, output_spectrum_numeric,
    prefactor, theta, TransferFunction,
};
