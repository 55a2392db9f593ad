use super::lyapunov::{lyapunov_residual, solve_lyapunov};
use super::modes::NormalModes;
use crate::crystal::MeanField;
use crate::error::{Error, Result};
use crate::params::Model;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Tolerance on the smallest eigenvalue of `Sigma + i Omega / 2`.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Linear quantum Langevin equations `du/dt = A u + noise` for the
/// quadratures `u = (x_c, p_c, q_1, p_1, ...)` with `delta a = (x_c + i p_c)/sqrt(2)`
/// and `b_n = (q_n + i p_n)/sqrt(2)`. The noise has symmetrized correlation `D`.
#[derive(Debug, Clone)]
pub struct LinearizedDynamics {
    pub drift: DMatrix<f64>,
    pub diffusion: DMatrix<f64>,
    pub kappa: f64,
    pub delta_eff: f64,
    pub amplitude: Complex64,
    /// Frequencies, couplings, damping and bath occupation of the retained modes.
    pub frequencies: Vec<f64>,
    pub couplings: Vec<f64>,
    pub damping: Vec<f64>,
    pub occupations: Vec<f64>,
    /// Crystal mode index of each retained phonon.
    pub retained: Vec<usize>,
}

impl LinearizedDynamics {
    pub fn dim(&self) -> usize {
        self.drift.nrows()
    }

    pub fn mode_count(&self) -> usize {
        self.retained.len()
    }

    /// Zero-order output intensity `I_0 = 2 kappa |a|^2`.
    pub fn zero_order_intensity(&self) -> f64 {
        2.0 * self.kappa * self.amplitude.norm_sqr()
    }

    /// Commutator matrix of the input noise, `-(A Omega + Omega A^T)`.
    pub fn noise_commutator(&self) -> DMatrix<f64> {
        let om = symplectic_form(self.mode_count() + 1);
        -(&self.drift * &om + &om * self.drift.transpose())
    }
}

/// `Omega = diag([[0, 1], [-1, 0]], ...)` for `modes` bosonic modes.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * modes, 2 * modes);
    for m in 0..modes {
        om[(2 * m, 2 * m + 1)] = 1.0;
        om[(2 * m + 1, 2 * m)] = -1.0;
    }
    om
}

/// Builds the drift and diffusion matrices. The cavity input is vacuum and
/// each phonon sees a reservoir with damping `Gamma_n` and occupation `N_n`
/// from `model.bath`.
pub fn drift_diffusion(model: &Model, mean_field: &MeanField, modes: &NormalModes) -> LinearizedDynamics {
    let nm = modes.len();
    let dim = 2 + 2 * nm;
    let (kappa, delta) = (model.kappa, mean_field.delta_eff);
    let (ar, ai) = (mean_field.amplitude.re, mean_field.amplitude.im);
    let mut a = DMatrix::zeros(dim, dim);
    let mut d = DMatrix::zeros(dim, dim);
    a[(0, 0)] = -kappa;
    a[(0, 1)] = -delta;
    a[(1, 0)] = delta;
    a[(1, 1)] = -kappa;
    d[(0, 0)] = kappa;
    d[(1, 1)] = kappa;
    let mut damping = Vec::with_capacity(nm);
    let mut occupations = Vec::with_capacity(nm);
    for m in 0..nm {
        let (iq, ip) = (2 + 2 * m, 3 + 2 * m);
        let idx = modes.indices[m];
        let (w, c) = (modes.frequencies[m], modes.couplings[m]);
        let g = model.bath.damping.get(idx);
        let occ = model.bath.occupation.of(idx, w);
        a[(iq, iq)] = -g;
        a[(iq, ip)] = w;
        a[(ip, iq)] = -w;
        a[(ip, ip)] = -g;
        a[(0, iq)] = 2.0 * c * ai;
        a[(1, iq)] = -2.0 * c * ar;
        a[(ip, 0)] = -2.0 * c * ar;
        a[(ip, 1)] = -2.0 * c * ai;
        d[(iq, iq)] = g * (2.0 * occ + 1.0);
        d[(ip, ip)] = g * (2.0 * occ + 1.0);
        damping.push(g);
        occupations.push(occ);
    }
    LinearizedDynamics {
        drift: a,
        diffusion: d,
        kappa,
        delta_eff: delta,
        amplitude: mean_field.amplitude,
        frequencies: modes.frequencies.clone(),
        couplings: modes.couplings.clone(),
        damping,
        occupations,
        retained: modes.indices.clone(),
    }
}

/// Stationary covariance `Sigma_ij = <{u_i, u_j}>/2` solving
/// `A Sigma + Sigma A^T + D = 0`.
pub fn steady_covariance(drift: &DMatrix<f64>, diffusion: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    solve_lyapunov(drift, diffusion)
}

/// Smallest eigenvalue of the Hermitian matrix `Sigma + i Omega / 2`.
pub fn uncertainty_margin(sigma: &DMatrix<f64>) -> f64 {
    let om = symplectic_form(sigma.nrows() / 2);
    let h = DMatrix::from_fn(sigma.nrows(), sigma.ncols(), |i, j| Complex64::new(sigma[(i, j)], 0.5 * om[(i, j)]));
    SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone)]
pub struct GaussianSteadyState {
    pub dynamics: LinearizedDynamics,
    pub covariance: DMatrix<f64>,
    /// Max-abs entry of `A Sigma + Sigma A^T + D`.
    pub residual: f64,
    /// Smallest eigenvalue of `Sigma + i Omega / 2`.
    pub uncertainty_margin: f64,
}

impl GaussianSteadyState {
    /// Mean excitation number of bosonic mode `m` (0 is the cavity).
    pub fn occupation(&self, m: usize) -> f64 {
        0.5 * (self.covariance[(2 * m, 2 * m)] + self.covariance[(2 * m + 1, 2 * m + 1)]) - 0.5
    }
}

/// Solves for the steady state and checks it against the uncertainty principle.
pub fn steady_state(dynamics: LinearizedDynamics) -> Result<GaussianSteadyState> {
    let covariance = steady_covariance(&dynamics.drift, &dynamics.diffusion)?;
    let residual = lyapunov_residual(&dynamics.drift, &covariance, &dynamics.diffusion);
    let margin = uncertainty_margin(&covariance);
    if margin < -PHYSICALITY_TOL {
        return Err(Error::Unphysical { min_eigenvalue: margin });
    }
    Ok(GaussianSteadyState { dynamics, covariance, residual, uncertainty_margin: margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluctuations::lyapunov::spectral_abscissa;
    use crate::params::{Bath, PerMode};

    fn toy(c: Vec<f64>, eta: f64) -> (Model, MeanField, NormalModes) {
        let mut model = Model::free_space(1, 2.0);
        model.kappa = 0.8;
        model.delta_c = -0.5;
        model.eta = eta;
        model.bath = Bath {
            damping: PerMode::Uniform(0.01),
            occupation: crate::params::Occupation::Fixed(PerMode::Uniform(0.3)),
        };
        let mf = MeanField::from_shift(&model, 0.0);
        let n = c.len();
        let modes = NormalModes {
            frequencies: (0..n).map(|i| 1.0 + 0.3 * i as f64).collect(),
            vectors: DMatrix::identity(n, n),
            zero_point: vec![0.01; n],
            couplings: c,
            indices: (0..n).collect(),
            mean_field: mf,
        };
        (model, mf, modes)
    }

    #[test]
    fn decoupled_blocks() {
        let (model, mf, modes) = toy(vec![0.0, 0.0], 1.0);
        let dyn_ = drift_diffusion(&model, &mf, &modes);
        let cav = dyn_.drift.view((0, 0), (2, 2)).clone_owned();
        let ev = cav.complex_eigenvalues();
        for z in ev.iter() {
            assert!((z.re + model.kappa).abs() < 1e-14);
            assert!((z.im.abs() - mf.delta_eff.abs()).abs() < 1e-14);
        }
        assert_eq!(dyn_.drift.view((0, 2), (2, 4)).amax(), 0.0);
        let ss = steady_state(dyn_).unwrap();
        assert!((ss.covariance.view((0, 0), (2, 2)) - DMatrix::identity(2, 2) * 0.5).amax() < 1e-12);
        assert!((ss.occupation(1) - 0.3).abs() < 1e-12 && (ss.occupation(2) - 0.3).abs() < 1e-12);
        assert!(ss.residual < 1e-12);
    }

    #[test]
    fn dark_cavity_leaves_bath_occupation() {
        let (model, mf, modes) = toy(vec![0.05, 0.02], 0.0);
        let ss = steady_state(drift_diffusion(&model, &mf, &modes)).unwrap();
        assert!((ss.occupation(1) - 0.3).abs() < 1e-12);
        assert!(ss.occupation(0).abs() < 1e-12);
    }

    #[test]
    fn coupled_state_is_physical_and_commutators_match() {
        let (model, mf, modes) = toy(vec![0.05, 0.02], 0.7);
        let dyn_ = drift_diffusion(&model, &mf, &modes);
        // Hamiltonian coupling leaves the noise commutators diagonal in modes
        let q = dyn_.noise_commutator();
        let expect = {
            let mut e = symplectic_form(3) * 0.0;
            let rates = [model.kappa, 0.01, 0.01];
            for (m, r) in rates.iter().enumerate() {
                e[(2 * m, 2 * m + 1)] = 2.0 * r;
                e[(2 * m + 1, 2 * m)] = -2.0 * r;
            }
            e
        };
        assert!((q - expect).amax() < 1e-14);
        assert!(spectral_abscissa(&dyn_.drift) < 0.0);
        let ss = steady_state(dyn_).unwrap();
        assert!(ss.uncertainty_margin > -PHYSICALITY_TOL);
    }
}
