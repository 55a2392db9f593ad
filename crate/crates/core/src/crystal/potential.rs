//! Energy, forces and curvature of `V_trap + V_Coul + V_eff`.
//!
//! Coordinates are flat vectors `[x_0..x_{N-1}, y_0..y_{N-1}]` in trap units.
//! The cavity enters through the dispersive shift
//! `U0 = (g0^2/Delta0) sum_j cos^2(k x_j) exp(-(y_j - y0)^2 / sigma^2)` and
//! `V_eff = (hbar eta^2 / kappa) atan((U0 - Delta_c) / kappa)`, whose
//! derivative with respect to `U0` is `hbar n_bar`.

use super::minimize::Objective;
use super::IonConfiguration;
use crate::error::{Error, Result};
use crate::params::Model;
use nalgebra::DMatrix;
use num_complex::Complex64;

const COINCIDENCE: f64 = 1e-9;

/// Intracavity steady state for frozen ion positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanField {
    pub u0: f64,
    pub delta_eff: f64,
    pub amplitude: Complex64,
    pub n_bar: f64,
    /// `2 kappa n_bar`, photons per unit time.
    pub output_intensity: f64,
}

impl MeanField {
    pub fn from_shift(model: &Model, u0: f64) -> Self {
        let delta_eff = model.delta_c - u0;
        let denom = Complex64::new(model.kappa, -delta_eff);
        let amplitude = Complex64::new(model.eta, 0.0) / denom;
        let n_bar = model.eta * model.eta / (model.kappa * model.kappa + delta_eff * delta_eff);
        MeanField { u0, delta_eff, amplitude, n_bar, output_intensity: 2.0 * model.kappa * n_bar }
    }
}

/// Potential-energy surface of the crystal for one parameter set.
#[derive(Debug, Clone, Copy)]
pub struct Potential<'a> {
    model: &'a Model,
}

impl<'a> Potential<'a> {
    pub fn new(model: &'a Model) -> Self {
        Potential { model }
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    fn cavity_active(&self) -> bool {
        self.model.eta != 0.0 && self.model.g0 != 0.0
    }

    pub fn check_separation(&self, q: &[f64]) -> Result<()> {
        let n = q.len() / 2;
        for j in 0..n {
            for l in (j + 1)..n {
                let r = (q[j] - q[l]).hypot(q[n + j] - q[n + l]);
                if r < COINCIDENCE {
                    return Err(Error::CoincidentIons(j, l));
                }
            }
        }
        Ok(())
    }

    /// `sum_j cos^2(k x_j) exp(-(y_j-y0)^2/sigma^2)`.
    pub fn overlap(&self, q: &[f64]) -> f64 {
        let m = self.model;
        let n = q.len() / 2;
        (0..n)
            .map(|j| {
                let c = (m.k * q[j]).cos();
                let dy = q[n + j] - m.y0;
                c * c * (-dy * dy / (m.sigma * m.sigma)).exp()
            })
            .sum()
    }

    pub fn u0(&self, q: &[f64]) -> f64 {
        self.model.single_ion_shift() * self.overlap(q)
    }

    /// Gradient of `U0`, and optionally its (block-diagonal) Hessian.
    pub fn u0_derivatives(&self, q: &[f64], grad: &mut [f64], mut hess: Option<&mut DMatrix<f64>>) -> f64 {
        let m = self.model;
        let n = q.len() / 2;
        let s = m.single_ion_shift();
        let inv_s2 = 1.0 / (m.sigma * m.sigma);
        let mut u0 = 0.0;
        for j in 0..n {
            let kx = m.k * q[j];
            let (sin2, cos2) = (2.0 * kx).sin_cos();
            let c2 = 0.5 * (1.0 + cos2);
            let dy = q[n + j] - m.y0;
            let env = (-dy * dy * inv_s2).exp();
            let denv = -2.0 * dy * inv_s2 * env;
            u0 += s * c2 * env;
            grad[j] = s * (-m.k * sin2) * env;
            grad[n + j] = s * c2 * denv;
            if let Some(h) = hess.as_deref_mut() {
                let d2env = env * (4.0 * dy * dy * inv_s2 * inv_s2 - 2.0 * inv_s2);
                h[(j, j)] = s * (-2.0 * m.k * m.k * cos2) * env;
                h[(j, n + j)] = s * (-m.k * sin2) * denv;
                h[(n + j, j)] = h[(j, n + j)];
                h[(n + j, n + j)] = s * c2 * d2env;
            }
        }
        u0
    }

    fn optical_energy(&self, u0: f64) -> f64 {
        let m = self.model;
        m.optical_depth() * ((u0 - m.delta_c) / m.kappa).atan()
    }

    pub fn trap_energy(&self, q: &[f64]) -> f64 {
        let n = q.len() / 2;
        let b2 = self.model.beta * self.model.beta;
        0.5 * (0..n).map(|j| b2 * q[j] * q[j] + q[n + j] * q[n + j]).sum::<f64>()
    }

    pub fn coulomb_energy(&self, q: &[f64]) -> f64 {
        let n = q.len() / 2;
        let mut e = 0.0;
        for j in 0..n {
            for l in (j + 1)..n {
                e += 1.0 / (q[j] - q[l]).hypot(q[n + j] - q[n + l]);
            }
        }
        e
    }

    pub fn optical_potential(&self, q: &[f64]) -> f64 {
        if self.model.eta == 0.0 {
            return 0.0;
        }
        self.optical_energy(self.u0(q))
    }

    pub fn energy(&self, q: &[f64]) -> f64 {
        self.trap_energy(q) + self.coulomb_energy(q) + self.optical_potential(q)
    }

    /// Trap + Coulomb gradient written into `grad`; returns their energy.
    fn mechanical_gradient(&self, q: &[f64], grad: &mut [f64]) -> f64 {
        let n = q.len() / 2;
        let b2 = self.model.beta * self.model.beta;
        let mut e = 0.0;
        for j in 0..n {
            grad[j] = b2 * q[j];
            grad[n + j] = q[n + j];
            e += 0.5 * (b2 * q[j] * q[j] + q[n + j] * q[n + j]);
        }
        for j in 0..n {
            for l in (j + 1)..n {
                let dx = q[j] - q[l];
                let dy = q[n + j] - q[n + l];
                let r2 = dx * dx + dy * dy;
                let r = r2.sqrt();
                let inv_r3 = 1.0 / (r2 * r);
                e += 1.0 / r;
                grad[j] -= dx * inv_r3;
                grad[l] += dx * inv_r3;
                grad[n + j] -= dy * inv_r3;
                grad[n + l] += dy * inv_r3;
            }
        }
        e
    }

    /// Energy and gradient of the full potential.
    pub fn energy_gradient(&self, q: &[f64], grad: &mut [f64]) -> f64 {
        let mut e = self.mechanical_gradient(q, grad);
        if self.cavity_active() {
            let mut gu = vec![0.0; q.len()];
            let u0 = self.u0_derivatives(q, &mut gu, None);
            let mf = MeanField::from_shift(self.model, u0);
            let w = self.model.hbar * mf.n_bar;
            for (g, d) in grad.iter_mut().zip(&gu) {
                *g += w * d;
            }
            e += self.optical_energy(u0);
        }
        e
    }

    fn mechanical_hessian(&self, q: &[f64]) -> DMatrix<f64> {
        let n = q.len() / 2;
        let b2 = self.model.beta * self.model.beta;
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            h[(j, j)] = b2;
            h[(n + j, n + j)] = 1.0;
        }
        for j in 0..n {
            for l in (j + 1)..n {
                let d = [q[j] - q[l], q[n + j] - q[n + l]];
                let r2 = d[0] * d[0] + d[1] * d[1];
                let r = r2.sqrt();
                let inv_r5 = 1.0 / (r2 * r2 * r);
                let idx = |a: usize, ion: usize| a * n + ion;
                for a in 0..2 {
                    for b in 0..2 {
                        let delta = if a == b { 1.0 } else { 0.0 };
                        let t = (3.0 * d[a] * d[b] - r2 * delta) * inv_r5;
                        h[(idx(a, j), idx(b, j))] += t;
                        h[(idx(a, l), idx(b, l))] += t;
                        h[(idx(a, j), idx(b, l))] -= t;
                        h[(idx(a, l), idx(b, j))] -= t;
                    }
                }
            }
        }
        h
    }

    /// Full Hessian including the cavity back-action term
    /// `hbar (d n_bar / d U0) grad U0 grad U0^T`.
    pub fn hessian(&self, q: &[f64]) -> DMatrix<f64> {
        self.hessian_impl(q, true)
    }

    /// Hessian with the photon number held at its mean-field value.
    pub fn hessian_fixed_photon_number(&self, q: &[f64]) -> DMatrix<f64> {
        self.hessian_impl(q, false)
    }

    fn hessian_impl(&self, q: &[f64], back_action: bool) -> DMatrix<f64> {
        let mut h = self.mechanical_hessian(q);
        if self.cavity_active() {
            let dim = q.len();
            let mut gu = vec![0.0; dim];
            let mut hu = DMatrix::zeros(dim, dim);
            let u0 = self.u0_derivatives(q, &mut gu, Some(&mut hu));
            let mf = MeanField::from_shift(self.model, u0);
            let m = self.model;
            h += hu * (m.hbar * mf.n_bar);
            if back_action {
                let dn_du = 2.0 * mf.delta_eff * mf.n_bar / (m.kappa * m.kappa + mf.delta_eff * mf.delta_eff);
                let w = m.hbar * dn_du;
                for a in 0..dim {
                    for b in 0..dim {
                        h[(a, b)] += w * gu[a] * gu[b];
                    }
                }
            }
        }
        h
    }
}

impl Objective for Potential<'_> {
    fn value_gradient(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        self.energy_gradient(x, grad)
    }
}

fn checked<'a>(model: &'a Model, cfg: &IonConfiguration) -> Result<(Potential<'a>, Vec<f64>)> {
    if model.delta0 == 0.0 {
        return Err(Error::SingularDetuning);
    }
    let pot = Potential::new(model);
    let q = cfg.to_flat();
    pot.check_separation(&q)?;
    Ok((pot, q))
}

/// Dispersive cavity shift `U0` produced by the ions.
pub fn u0_shift(model: &Model, cfg: &IonConfiguration) -> Result<f64> {
    if model.delta0 == 0.0 {
        return Err(Error::SingularDetuning);
    }
    Ok(Potential::new(model).u0(&cfg.to_flat()))
}

/// Effective number of ions coupled at the given positions,
/// `sum_j cos^2(k x_j) exp(-(y_j - y0)^2/sigma^2)`.
pub fn n_eff(model: &Model, cfg: &IonConfiguration) -> f64 {
    Potential::new(model).overlap(&cfg.to_flat())
}

pub fn mean_field(model: &Model, cfg: &IonConfiguration) -> Result<MeanField> {
    Ok(MeanField::from_shift(model, u0_shift(model, cfg)?))
}

pub fn total_potential(model: &Model, cfg: &IonConfiguration) -> Result<f64> {
    let (pot, q) = checked(model, cfg)?;
    Ok(pot.energy(&q))
}

pub fn gradient(model: &Model, cfg: &IonConfiguration) -> Result<Vec<f64>> {
    let (pot, q) = checked(model, cfg)?;
    let mut g = vec![0.0; q.len()];
    pot.energy_gradient(&q, &mut g);
    Ok(g)
}

pub fn u0_gradient(model: &Model, cfg: &IonConfiguration) -> Result<Vec<f64>> {
    let (pot, q) = checked(model, cfg)?;
    let mut g = vec![0.0; q.len()];
    pot.u0_derivatives(&q, &mut g, None);
    Ok(g)
}

/// Gradient of `V_eff` alone, differentiated directly from the arctangent form.
pub fn optical_gradient(model: &Model, cfg: &IonConfiguration) -> Result<Vec<f64>> {
    let mut g = u0_gradient(model, cfg)?;
    let u0 = u0_shift(model, cfg)?;
    let s = (u0 - model.delta_c) / model.kappa;
    let dv_du = model.optical_depth() / (model.kappa * (1.0 + s * s));
    for v in &mut g {
        *v *= dv_du;
    }
    Ok(g)
}

pub fn hessian(model: &Model, cfg: &IonConfiguration) -> Result<DMatrix<f64>> {
    let (pot, q) = checked(model, cfg)?;
    Ok(pot.hessian(&q))
}

pub fn hessian_fixed_photon_number(model: &Model, cfg: &IonConfiguration) -> Result<DMatrix<f64>> {
    let (pot, q) = checked(model, cfg)?;
    Ok(pot.hessian_fixed_photon_number(&q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn cavity_model(n: usize) -> Model {
        let mut m = Model::free_space(n, 3.0);
        m.k = 20.0;
        m.sigma = 1.5;
        m.g0 = 30.0;
        m.delta0 = 500.0;
        m.kappa = 1.0;
        m.hbar = 1e-3;
        m.eta = 40.0;
        m
    }

    #[test]
    fn u0_node_and_antinode() {
        let m = cavity_model(1);
        let node = IonConfiguration::new(vec![[FRAC_PI_2 / m.k, 0.0]]);
        assert!(u0_shift(&m, &node).unwrap().abs() < 1e-12);
        let anti = IonConfiguration::new(vec![[0.0, 0.0]]);
        assert!((u0_shift(&m, &anti).unwrap() - m.g0 * m.g0 / m.delta0).abs() < 1e-12);
    }

    #[test]
    fn u0_singular_detuning() {
        let mut m = cavity_model(1);
        m.delta0 = 0.0;
        let c = IonConfiguration::new(vec![[0.0, 0.0]]);
        assert!(matches!(u0_shift(&m, &c), Err(Error::SingularDetuning)));
    }

    #[test]
    fn mean_field_invariants() {
        let m = cavity_model(2);
        let c = IonConfiguration::new(vec![[0.01, -0.6], [-0.02, 0.7]]);
        let mf = mean_field(&m, &c).unwrap();
        assert!((mf.delta_eff - (m.delta_c - mf.u0)).abs() < 1e-15);
        assert!((mf.amplitude.norm_sqr() - mf.n_bar).abs() < 1e-12 * mf.n_bar);
        assert!((mf.output_intensity - 2.0 * m.kappa * mf.n_bar).abs() < 1e-12);
        let mut dark = m.clone();
        dark.eta = 0.0;
        let mf = mean_field(&dark, &c).unwrap();
        assert_eq!(mf.n_bar, 0.0);
        assert_eq!(mf.output_intensity, 0.0);
    }

    #[test]
    fn resonant_cavity_photon_number() {
        let mut m = cavity_model(1);
        let c = IonConfiguration::new(vec![[0.0, 0.0]]);
        m.delta_c = u0_shift(&m, &c).unwrap();
        let mf = mean_field(&m, &c).unwrap();
        assert!((mf.n_bar - m.eta * m.eta / (m.kappa * m.kappa)).abs() < 1e-9);
        // V_eff vanishes when Delta_eff = 0
        let pot = Potential::new(&m);
        assert!(pot.optical_potential(&c.to_flat()).abs() < 1e-15);
    }

    #[test]
    fn single_ion_transverse_force() {
        let m = cavity_model(1);
        let x = 0.013;
        let c = IonConfiguration::new(vec![[x, m.y0]]);
        let g = optical_gradient(&m, &c).unwrap();
        let mf = mean_field(&m, &c).unwrap();
        let expect = m.hbar * mf.n_bar * (m.g0 * m.g0 / m.delta0) * (-m.k * (2.0 * m.k * x).sin());
        assert!((g[0] - expect).abs() < 1e-13 * expect.abs().max(1.0));
    }

    #[test]
    fn coincident_ions_rejected() {
        let m = cavity_model(2);
        let c = IonConfiguration::new(vec![[0.0, 0.1], [0.0, 0.1]]);
        assert!(matches!(total_potential(&m, &c), Err(Error::CoincidentIons(0, 1))));
        assert!(gradient(&m, &c).is_err());
        assert!(hessian(&m, &c).is_err());
    }

    #[test]
    fn reflection_symmetry_of_linear_chain() {
        let m = cavity_model(4);
        let c = IonConfiguration::new(vec![[0.0, -1.5], [0.0, -0.5], [0.0, 0.5], [0.0, 1.5]]);
        let g = gradient(&m, &c).unwrap();
        for gx in &g[..4] {
            assert_eq!(*gx, 0.0);
        }
    }

    #[test]
    fn trivial_energies() {
        let m = Model::free_space(1, 2.0);
        let c = IonConfiguration::new(vec![[0.0, 0.0]]);
        assert_eq!(total_potential(&m, &c).unwrap(), 0.0);
    }
}
