//! Physical parameters and the dimensionless model used internally.
//!
//! Everything inside the crate works in trap units: time in `1/omega_a`,
//! length in `l = (q^2 / (4 pi eps0 m omega_a^2))^(1/3)`, energy in
//! `m omega_a^2 l^2`. In these units the trap and Coulomb energies carry no
//! prefactors and Planck's constant becomes the small number
//! `hbar / (m omega_a l^2)`. [`SystemParams`] holds SI values and
//! [`SystemParams::to_model`] is the only place conversions happen.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub mod constants {
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    pub const ATOMIC_MASS: f64 = 1.660_539_066_60e-27;
    pub const BOLTZMANN: f64 = 1.380_649e-23;
    /// Mass of a 40Ca+ ion.
    pub const CALCIUM_40_MASS: f64 = 39.962_590_9 * ATOMIC_MASS;
}

/// A per-mode quantity that is usually uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerMode {
    Uniform(f64),
    Each(Vec<f64>),
}

impl PerMode {
    pub fn get(&self, mode: usize) -> f64 {
        match self {
            PerMode::Uniform(v) => *v,
            PerMode::Each(vs) => vs.get(mode).copied().unwrap_or_else(|| *vs.last().unwrap_or(&0.0)),
        }
    }

    fn scaled(&self, factor: f64) -> PerMode {
        match self {
            PerMode::Uniform(v) => PerMode::Uniform(v * factor),
            PerMode::Each(vs) => PerMode::Each(vs.iter().map(|v| v * factor).collect()),
        }
    }
}

/// Mean phonon number of the reservoir each normal mode couples to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Occupation {
    /// Fixed occupation(s), independent of the mode frequency.
    Fixed(PerMode),
    /// Bose-Einstein occupation at temperature `k_B T`, expressed in the
    /// same frequency units as the rest of the parameter set (`k_B T / hbar`).
    Thermal { thermal_frequency: f64 },
}

impl Occupation {
    /// Occupation of mode `mode` with angular frequency `omega`
    /// (same units as `thermal_frequency`).
    pub fn of(&self, mode: usize, omega: f64) -> f64 {
        match self {
            Occupation::Fixed(p) => p.get(mode),
            Occupation::Thermal { thermal_frequency } => {
                if *thermal_frequency <= 0.0 {
                    0.0
                } else {
                    1.0 / ((omega / thermal_frequency).exp_m1())
                }
            }
        }
    }

    fn scaled(&self, factor: f64) -> Occupation {
        match self {
            Occupation::Fixed(p) => Occupation::Fixed(p.clone()),
            Occupation::Thermal { thermal_frequency } => {
                Occupation::Thermal { thermal_frequency: thermal_frequency * factor }
            }
        }
    }
}

/// Reservoir coupling of the ion motion: damping rates `Gamma_n` and
/// reservoir occupations `N_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bath {
    pub damping: PerMode,
    pub occupation: Occupation,
}

impl Bath {
    /// Damping `1e-3 omega_a` on every mode and the given uniform occupation.
    pub fn weak(omega_a: f64, occupation: f64) -> Self {
        Bath { damping: PerMode::Uniform(1e-3 * omega_a), occupation: Occupation::Fixed(PerMode::Uniform(occupation)) }
    }

    /// Damping `1e-3 omega_a` and Bose-Einstein occupations at `temperature` (kelvin).
    /// Frequencies are in rad/s.
    pub fn thermal(omega_a: f64, temperature: f64) -> Self {
        Bath {
            damping: PerMode::Uniform(1e-3 * omega_a),
            occupation: Occupation::Thermal { thermal_frequency: constants::BOLTZMANN * temperature / constants::HBAR },
        }
    }

    fn scaled(&self, frequency_factor: f64) -> Bath {
        Bath { damping: self.damping.scaled(frequency_factor), occupation: self.occupation.scaled(frequency_factor) }
    }
}

/// Trap, cavity, pump and reservoir parameters in SI units.
/// All frequencies are angular (rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n_ions: usize,
    pub mass: f64,
    pub charge: f64,
    pub omega_axial: f64,
    pub omega_transverse: f64,
    pub g0: f64,
    pub wavenumber: f64,
    pub waist: f64,
    pub mode_center: f64,
    pub delta0: f64,
    pub delta_c: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub eta: f64,
    pub bath: Bath,
}

/// Conversion factors between trap units and SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    /// Length unit in metres.
    pub length: f64,
    /// Frequency unit (axial trap frequency) in rad/s.
    pub frequency: f64,
    /// Energy unit in joules.
    pub energy: f64,
}

impl Units {
    pub fn new(mass: f64, charge: f64, omega_axial: f64) -> Self {
        let coulomb = charge * charge / (4.0 * PI * constants::EPSILON_0);
        let length = (coulomb / (mass * omega_axial * omega_axial)).cbrt();
        Units { length, frequency: omega_axial, energy: mass * omega_axial * omega_axial * length * length }
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {value}") })
    }
}

fn finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: format!("must be finite, got {value}") })
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_ions == 0 {
            return Err(Error::InvalidParameter { name: "n_ions", reason: "need at least one ion".into() });
        }
        positive("mass", self.mass)?;
        positive("omega_axial", self.omega_axial)?;
        positive("omega_transverse", self.omega_transverse)?;
        positive("wavenumber", self.wavenumber)?;
        positive("waist", self.waist)?;
        positive("kappa", self.kappa)?;
        positive("gamma", self.gamma)?;
        if self.charge == 0.0 || !self.charge.is_finite() {
            return Err(Error::InvalidParameter { name: "charge", reason: "must be nonzero".into() });
        }
        if !(self.g0.is_finite() && self.g0 >= 0.0) {
            return Err(Error::InvalidParameter { name: "g0", reason: "must be >= 0".into() });
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::InvalidParameter { name: "eta", reason: "must be >= 0".into() });
        }
        finite("mode_center", self.mode_center)?;
        finite("delta_c", self.delta_c)?;
        finite("delta0", self.delta0)?;
        if self.delta0 == 0.0 {
            return Err(Error::SingularDetuning);
        }
        Ok(())
    }

    pub fn units(&self) -> Units {
        Units::new(self.mass, self.charge, self.omega_axial)
    }

    /// Recoil frequency `hbar k^2 / (2 m)` in rad/s.
    pub fn recoil_frequency(&self) -> f64 {
        constants::HBAR * self.wavenumber * self.wavenumber / (2.0 * self.mass)
    }

    /// Reference pump strength `eta_0 = sqrt(kappa omega_a^2 / (2 omega_R))`.
    pub fn eta_reference(&self) -> f64 {
        (self.kappa * self.omega_axial * self.omega_axial / (2.0 * self.recoil_frequency())).sqrt()
    }

    /// Sets `eta` from the dimensionless pump power `P = (eta/eta_0)^2`.
    pub fn set_pump_power(&mut self, power: f64) {
        self.eta = self.eta_reference() * power.max(0.0).sqrt();
    }

    pub fn to_model(&self) -> Result<Model> {
        self.validate()?;
        let u = self.units();
        let w = u.frequency;
        Ok(Model {
            n_ions: self.n_ions,
            beta: self.omega_transverse / w,
            hbar: constants::HBAR / (self.mass * w * u.length * u.length),
            k: self.wavenumber * u.length,
            sigma: self.waist / u.length,
            y0: self.mode_center / u.length,
            g0: self.g0 / w,
            delta0: self.delta0 / w,
            delta_c: self.delta_c / w,
            kappa: self.kappa / w,
            gamma: self.gamma / w,
            eta: self.eta / w,
            bath: self.bath.scaled(1.0 / w),
        })
    }
}

/// The system in trap units. Frequencies are multiples of `omega_a`,
/// lengths of `l`, and the ion mass is one.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub n_ions: usize,
    /// `omega_t / omega_a`.
    pub beta: f64,
    /// `hbar / (m omega_a l^2)`.
    pub hbar: f64,
    pub k: f64,
    pub sigma: f64,
    pub y0: f64,
    pub g0: f64,
    pub delta0: f64,
    pub delta_c: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub eta: f64,
    pub bath: Bath,
}

impl Model {
    /// Ions in the bare trap: no pump and no atom-cavity coupling.
    /// The cavity geometry is placeholder and never enters the energy.
    pub fn free_space(n_ions: usize, beta: f64) -> Self {
        Model {
            n_ions,
            beta,
            hbar: 1e-4,
            k: 1.0,
            sigma: 1.0,
            y0: 0.0,
            g0: 0.0,
            delta0: 1.0,
            delta_c: 0.0,
            kappa: 1.0,
            gamma: 1.0,
            eta: 0.0,
            bath: Bath::weak(1.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_ions == 0 {
            return Err(Error::InvalidParameter { name: "n_ions", reason: "need at least one ion".into() });
        }
        positive("beta", self.beta)?;
        positive("hbar", self.hbar)?;
        positive("k", self.k)?;
        positive("sigma", self.sigma)?;
        positive("kappa", self.kappa)?;
        finite("eta", self.eta)?;
        if self.delta0 == 0.0 {
            return Err(Error::SingularDetuning);
        }
        Ok(())
    }

    /// Recoil frequency `hbar k^2 / 2` (mass one).
    pub fn recoil_frequency(&self) -> f64 {
        0.5 * self.hbar * self.k * self.k
    }

    /// Squared reference pump strength `eta_0^2 = kappa / (2 omega_R)` (omega_a = 1).
    pub fn eta_reference_sq(&self) -> f64 {
        self.kappa / (2.0 * self.recoil_frequency())
    }

    pub fn pump_power(&self) -> f64 {
        self.eta * self.eta / self.eta_reference_sq()
    }

    pub fn set_pump_power(&mut self, power: f64) {
        self.eta = (power.max(0.0) * self.eta_reference_sq()).sqrt();
    }

    pub fn with_pump_power(mut self, power: f64) -> Self {
        self.set_pump_power(power);
        self
    }

    /// Prefactor `hbar eta^2 / kappa` of the optical potential. Equals
    /// `P / k^2` in trap units.
    pub fn optical_depth(&self) -> f64 {
        self.hbar * self.eta * self.eta / self.kappa
    }

    /// Light shift per ion at an antinode on the mode axis, `g0^2 / Delta0`.
    pub fn single_ion_shift(&self) -> f64 {
        self.g0 * self.g0 / self.delta0
    }

    /// Chooses `g0` so that `g0^2 n_eff / (kappa |Delta0|)` equals `cooperativity`.
    pub fn set_cooperativity(&mut self, cooperativity: f64, n_eff: f64) -> Result<()> {
        if !(n_eff > 0.0) {
            return Err(Error::InvalidParameter { name: "n_eff", reason: "must be > 0".into() });
        }
        if !(cooperativity >= 0.0) {
            return Err(Error::InvalidParameter { name: "cooperativity", reason: "must be >= 0".into() });
        }
        self.g0 = (cooperativity * self.kappa * self.delta0.abs() / n_eff).sqrt();
        Ok(())
    }
}

/// `C = g0^2 n_eff / (kappa |Delta0|)`. Works in any consistent frequency units.
pub fn cooperativity(g0: f64, kappa: f64, delta0: f64, n_eff: f64) -> Result<f64> {
    positive("kappa", kappa)?;
    if delta0 == 0.0 {
        return Err(Error::SingularDetuning);
    }
    Ok(g0 * g0 * n_eff / (kappa * delta0.abs()))
}

/// Outcome of the dispersive-regime check
/// `|Delta0| >= 10 max(gamma, kappa, |Delta_c|, g0 sqrt(n_bar))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveCheck {
    pub ratio: f64,
    pub valid: bool,
}

pub const DISPERSIVE_MARGIN: f64 = 10.0;

pub fn dispersive_check(model: &Model, n_bar: f64) -> DispersiveCheck {
    let largest = model.gamma.max(model.kappa).max(model.delta_c.abs()).max(model.g0 * n_bar.max(0.0).sqrt());
    let ratio = model.delta0.abs() / largest;
    DispersiveCheck { ratio, valid: ratio >= DISPERSIVE_MARGIN }
}

/// Converts an ordinary frequency in MHz into rad/s.
pub fn mhz(f: f64) -> f64 {
    2.0 * PI * f * 1e6
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calcium() -> SystemParams {
        SystemParams {
            n_ions: 3,
            mass: constants::CALCIUM_40_MASS,
            charge: constants::ELEMENTARY_CHARGE,
            omega_axial: mhz(0.1),
            omega_transverse: mhz(2.26),
            g0: mhz(9.4),
            wavenumber: 2.0 * PI / 866e-9,
            waist: 14e-6,
            mode_center: 0.0,
            delta0: mhz(500.0),
            delta_c: 0.0,
            kappa: mhz(0.5),
            gamma: mhz(10.0),
            eta: 0.0,
            bath: Bath::weak(mhz(0.1), 0.0),
        }
    }

    #[test]
    fn length_unit_for_calcium() {
        let u = calcium().units();
        // (e^2/(4 pi eps0 m w^2))^(1/3) for 40Ca+ at 100 kHz is about 20.6 um.
        assert!((u.length - 20.6e-6).abs() < 0.1e-6, "{}", u.length);
    }

    #[test]
    fn optical_depth_is_p_over_k_squared() {
        let mut m = calcium().to_model().unwrap();
        m.set_pump_power(160.0);
        let expect = 160.0 / (m.k * m.k);
        assert!((m.optical_depth() - expect).abs() < 1e-12 * expect);
        assert!((m.pump_power() - 160.0).abs() < 1e-9);
    }

    #[test]
    fn pump_power_agrees_between_si_and_model() {
        let mut p = calcium();
        p.set_pump_power(42.0);
        let m = p.to_model().unwrap();
        assert!((m.pump_power() - 42.0).abs() < 1e-9);
    }

    #[test]
    fn zero_detuning_rejected() {
        let mut p = calcium();
        p.delta0 = 0.0;
        assert!(matches!(p.to_model(), Err(Error::SingularDetuning)));
    }

    #[test]
    fn cooperativity_of_long_chain_setup() {
        let c = cooperativity(9.4, 0.5, 500.0, 5.7).unwrap();
        assert!((c - 2.01).abs() < 0.01, "{c}");
        assert_eq!(cooperativity(9.4, 0.5, 500.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn set_cooperativity_inverts() {
        let mut m = calcium().to_model().unwrap();
        m.set_cooperativity(3.0, 1.1).unwrap();
        let c = cooperativity(m.g0, m.kappa, m.delta0, 1.1).unwrap();
        assert!((c - 3.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_occupation() {
        let occ = Occupation::Thermal { thermal_frequency: 2.0 };
        let n = occ.of(0, 1.0);
        assert!((n - 1.0 / (0.5f64.exp() - 1.0)).abs() < 1e-12);
    }
}
