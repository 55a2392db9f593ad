//! Inelastic spectrum of the cavity output `S(nu) = <a_out^dag(nu) a_out(nu)> / I_0`,
//! with `a_out = a_in + sqrt(2 kappa) a` and `I_0 = 2 kappa |a|^2`. Frequencies
//! are in units of `omega_a` and `S` in units of `1/omega_a`. The elastic
//! (Rayleigh) delta peak at `nu = 0` is not part of the fluctuation spectrum.

use super::langevin::{drift_diffusion, LinearizedDynamics};
use super::lyapunov::spectral_abscissa;
use super::modes::NormalModes;
use crate::crystal::MeanField;
use crate::error::{Error, Result};
use crate::params::Model;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `theta(nu) = sum_n c_n^2 omega_n / (omega_n^2 + (Gamma_n - i nu)^2)`.
pub fn theta(dynamics: &LinearizedDynamics, nu: f64) -> Complex64 {
    (0..dynamics.mode_count())
        .map(|m| {
            let (w, c, g) = (dynamics.frequencies[m], dynamics.couplings[m], dynamics.damping[m]);
            let z = Complex64::new(g, -nu);
            c * c * w / (w * w + z * z)
        })
        .sum()
}

/// Common prefactor `S_0(nu)`.
pub fn prefactor(dynamics: &LinearizedDynamics, nu: f64) -> f64 {
    let (k, d) = (dynamics.kappa, dynamics.delta_eff);
    let a2 = dynamics.amplitude.norm_sqr();
    let km = Complex64::new(k, -nu);
    let r = 1.0 + 4.0 * d * theta(dynamics, nu) * a2 / (km * km + d * d);
    2.0 / (k * k + (nu + d) * (nu + d)) / r.norm_sqr()
}

/// Closed-form spectrum at one frequency.
pub fn analytic_point(dynamics: &LinearizedDynamics, nu: f64) -> f64 {
    let (k, d) = (dynamics.kappa, dynamics.delta_eff);
    let a2 = dynamics.amplitude.norm_sqr();
    let th = theta(dynamics, nu);
    let vacuum = 4.0 * k * th.norm_sqr() * a2 / (k * k + (nu - d) * (nu - d));
    let thermal: f64 = (0..dynamics.mode_count())
        .map(|m| {
            let (w, c, g, n) =
                (dynamics.frequencies[m], dynamics.couplings[m], dynamics.damping[m], dynamics.occupations[m]);
            c * c * g * (n / (g * g + (w - nu).powi(2)) + (n + 1.0) / (g * g + (w + nu).powi(2)))
        })
        .sum();
    prefactor(dynamics, nu) * (vacuum + thermal)
}

/// Closed-form spectrum on a frequency grid.
pub fn output_spectrum_analytic(model: &Model, mean_field: &MeanField, modes: &NormalModes, nu: &[f64]) -> Vec<f64> {
    let dynamics = drift_diffusion(model, mean_field, modes);
    nu.par_iter().map(|&v| analytic_point(&dynamics, v)).collect()
}

/// Frequency-domain solution of the Langevin equations.
pub struct TransferFunction<'a> {
    dynamics: &'a LinearizedDynamics,
    correlation: DMatrix<Complex64>,
    intensity: f64,
}

impl<'a> TransferFunction<'a> {
    pub fn new(dynamics: &'a LinearizedDynamics) -> Result<Self> {
        let max_real = spectral_abscissa(&dynamics.drift);
        if !(max_real < 0.0) {
            return Err(Error::NoSteadyState { max_real });
        }
        let intensity = dynamics.zero_order_intensity();
        if !(intensity > 0.0) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: "spectrum is normalized by a vanishing output intensity".into(),
            });
        }
        let q = dynamics.noise_commutator();
        let correlation = DMatrix::from_fn(dynamics.dim(), dynamics.dim(), |i, j| {
            Complex64::new(dynamics.diffusion[(i, j)], 0.5 * q[(i, j)])
        });
        Ok(TransferFunction { dynamics, correlation, intensity })
    }

    /// `G(nu) = (-i nu - A)^{-1}`.
    pub fn response(&self, nu: f64) -> Option<DMatrix<Complex64>> {
        let n = self.dynamics.dim();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let a = Complex64::new(-self.dynamics.drift[(i, j)], 0.0);
            if i == j {
                a - I * nu
            } else {
                a
            }
        });
        m.try_inverse()
    }

    /// Spectrum at one frequency.
    pub fn spectrum(&self, nu: f64) -> Option<f64> {
        let n = self.dynamics.dim();
        let mt = DMatrix::from_fn(n, n, |i, j| {
            let a = Complex64::new(-self.dynamics.drift[(j, i)], 0.0);
            if i == j {
                a - I * nu
            } else {
                a
            }
        });
        // rows 0 and 1 of G are the solutions of G^T y = e_0, e_1
        let mut rhs = DMatrix::zeros(n, 2);
        rhs[(0, 0)] = Complex64::new(1.0, 0.0);
        rhs[(1, 1)] = Complex64::new(1.0, 0.0);
        let rows = mt.lu().solve(&rhs)?;
        let sk = self.dynamics.kappa.sqrt();
        let mut w: Vec<Complex64> = (0..n).map(|j| sk * (rows[(j, 0)] + I * rows[(j, 1)])).collect();
        w[0] += 0.5 / sk;
        w[1] += 0.5 * I / sk;
        let cw = &self.correlation * DMatrix::from_column_slice(n, 1, &w);
        let s: Complex64 = (0..n).map(|i| w[i].conj() * cw[(i, 0)]).sum();
        Some(s.re / self.intensity)
    }
}

/// Transfer-function spectrum on a frequency grid.
pub fn output_spectrum_numeric(dynamics: &LinearizedDynamics, nu: &[f64]) -> Result<Vec<f64>> {
    let tf = TransferFunction::new(dynamics)?;
    nu.par_iter().map(|&v| tf.spectrum(v).ok_or(Error::NoSteadyState { max_real: 0.0 })).collect()
}

/// Uniform grid of `points` frequencies spanning `[lo, hi]`.
pub fn frequency_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect(),
    }
}

/// Largest relative difference `|a - b| / max(|a|, |b|)` over the grid.
pub fn max_relative_difference(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let scale = x.abs().max(y.abs());
            if scale == 0.0 {
                0.0
            } else {
                (x - y).abs() / scale
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluctuations::langevin::steady_covariance;
    use crate::params::{Bath, Occupation, PerMode};

    fn toy(c: Vec<f64>, damping: f64, occupation: f64, delta_c: f64) -> LinearizedDynamics {
        let mut model = Model::free_space(1, 2.0);
        model.kappa = 0.6;
        model.delta_c = delta_c;
        model.eta = 0.9;
        model.bath =
            Bath { damping: PerMode::Uniform(damping), occupation: Occupation::Fixed(PerMode::Uniform(occupation)) };
        let mf = MeanField::from_shift(&model, 0.0);
        let n = c.len();
        let modes = NormalModes {
            frequencies: (0..n).map(|i| 1.0 + 0.45 * i as f64).collect(),
            vectors: DMatrix::identity(n, n),
            zero_point: vec![0.01; n],
            couplings: c,
            indices: (0..n).collect(),
            mean_field: mf,
        };
        drift_diffusion(&model, &mf, &modes)
    }

    #[test]
    fn analytic_matches_transfer_function() {
        let d = toy(vec![0.12, -0.07], 0.02, 0.4, -0.8);
        let nu = frequency_grid(-3.0, 3.0, 301);
        let num = output_spectrum_numeric(&d, &nu).unwrap();
        let ana: Vec<f64> = nu.iter().map(|&v| analytic_point(&d, v)).collect();
        assert!(max_relative_difference(&num, &ana) < 1e-9, "{}", max_relative_difference(&num, &ana));
    }

    #[test]
    fn decoupled_cavity_is_dark() {
        let d = toy(vec![0.0, 0.0], 0.02, 0.4, -0.8);
        let nu = frequency_grid(-3.0, 3.0, 61);
        for s in output_spectrum_numeric(&d, &nu).unwrap() {
            assert!(s.abs() < 1e-14);
        }
    }

    #[test]
    fn weak_coupling_sidebands() {
        let (g, n) = (0.01, 0.5);
        let d = toy(vec![1e-3], g, n, 0.0);
        let w = d.frequencies[0];
        let s = |v: f64| analytic_point(&d, v);
        // at resonance, anti-Stokes/Stokes weight carries N/(N+1)
        let ratio = s(w) / s(-w);
        assert!((ratio - n / (n + 1.0)).abs() < 1e-2 * n / (n + 1.0), "{ratio}");
        // Lorentzian half width near the damping rate
        let half = s(-w) / 2.0;
        let mut lo = -w;
        while s(lo) > half {
            lo -= 1e-5;
        }
        assert!(((-w - lo) - g).abs() < 0.1 * g, "width {}", -w - lo);
    }

    #[test]
    fn small_coupling_prefactor_is_lorentzian() {
        let d = toy(vec![1e-4], 0.02, 0.1, -0.3);
        for v in [-2.0, -0.5, 0.0, 0.7] {
            let lorentz = 2.0 / (d.kappa.powi(2) + (v + d.delta_eff).powi(2));
            assert!((prefactor(&d, v) - lorentz).abs() < 1e-6 * lorentz);
        }
    }

    #[test]
    fn covariance_is_integrated_spectral_density() {
        let d = toy(vec![0.15, 0.1], 0.08, 0.3, -0.7);
        let tf = TransferFunction::new(&d).unwrap();
        let sigma = steady_covariance(&d.drift, &d.diffusion).unwrap();
        let dd = d.diffusion.map(|v| Complex64::new(v, 0.0));
        // nu = s tan(t), Simpson in t
        let (s, steps) = (1.0, 40_000);
        let h = std::f64::consts::PI / steps as f64;
        let n = d.dim();
        let mut acc = DMatrix::<f64>::zeros(n, n);
        for i in 1..steps {
            let t = -std::f64::consts::FRAC_PI_2 + h * i as f64;
            let wgt = if i % 2 == 1 { 4.0 } else { 2.0 };
            let g = tf.response(s * t.tan()).unwrap();
            let dens = (&g * &dd * g.adjoint()).map(|z| z.re);
            acc += dens * (wgt * s / t.cos().powi(2));
        }
        acc *= h / 3.0 / (2.0 * std::f64::consts::PI);
        let rel = (&acc - &sigma).amax() / sigma.amax();
        assert!(rel < 1e-4, "{rel}");
    }
}
