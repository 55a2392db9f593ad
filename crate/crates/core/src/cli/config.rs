//! Run configuration. Every `*_mhz` key is an ordinary frequency `omega / 2 pi`
//! in MHz and is multiplied by `2 pi` internally; lengths carry their unit in
//! the key name.

use crate::crystal::{free_space_chain, n_eff, EquilibriumOptions, IonConfiguration};
use crate::error::{Error, Result};
use crate::params::{constants, mhz, Bath, Model, Occupation, PerMode, SystemParams};
use crate::scenario::DEFAULT_BATH_TEMPERATURE;
use crate::structural::SweepOptions;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    #[serde(default)]
    pub seed: u64,
    pub system: SystemConfig,
    #[serde(default)]
    pub bath: BathConfig,
    #[serde(default)]
    pub equilibrium: EquilibriumConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub softmode: SoftModeConfig,
    #[serde(default)]
    pub fluctuations: FluctuationsConfig,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub negativity: NegativityConfig,
}

fn default_out_dir() -> String {
    "out".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeAnchor {
    Centre,
    LeftEdge,
    RightEdge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub n_ions: usize,
    #[serde(default = "calcium_amu")]
    pub mass_amu: f64,
    #[serde(default = "one")]
    pub charge_e: f64,
    pub axial_mhz: f64,
    pub transverse_mhz: f64,
    pub wavelength_nm: f64,
    /// Mode waist in micrometres. Exclusive with `waist_per_spacing`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waist_um: Option<f64>,
    /// Mode waist as a multiple of the central spacing of the bare linear chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waist_per_spacing: Option<f64>,
    /// Axial position of the mode centre in micrometres. Exclusive with `mode_anchor`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_center_um: Option<f64>,
    /// Centres the mode on an ion of the bare linear chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_anchor: Option<ModeAnchor>,
    /// Vacuum Rabi frequency. Exclusive with `cooperativity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0_mhz: Option<f64>,
    /// Sets `g0` from `g0^2 N_eff / (kappa |Delta0|)` of the bare linear chain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cooperativity: Option<f64>,
    pub delta0_mhz: f64,
    #[serde(default)]
    pub delta_c_mhz: f64,
    pub kappa_mhz: f64,
    pub gamma_mhz: f64,
    /// Dimensionless pump power `(eta / eta_0)^2`.
    #[serde(default)]
    pub pump_power: f64,
}

fn calcium_amu() -> f64 {
    constants::CALCIUM_40_MASS / constants::ATOMIC_MASS
}

fn one() -> f64 {
    1.0
}

/// Reservoir of the ion motion. `temperature_mk` and `occupation` are exclusive;
/// with neither, the default temperature applies.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathConfig {
    /// Damping of every mode; defaults to `1e-3` times the axial frequency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_mk: Option<f64>,
    /// Fixed mean occupation of every mode's reservoir.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub occupation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Seed {
    #[default]
    Linear,
    Zigzag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EquilibriumConfig {
    pub seed: Seed,
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for EquilibriumConfig {
    fn default() -> Self {
        let d = EquilibriumOptions::default();
        EquilibriumConfig { seed: Seed::Linear, grad_tol: d.grad_tol, max_iter: d.max_iter }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub power_min: f64,
    pub power_max: f64,
    pub steps: usize,
    /// Transverse jitter added to each warm start, in trap units.
    pub noise: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let d = SweepOptions::default();
        SweepConfig { power_min: d.power_min, power_max: d.power_max, steps: d.steps, noise: d.noise }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SoftModeConfig {
    pub powers: Vec<f64>,
    /// Largest displacement of the reference ion, in units of `1/k`.
    pub half_range_k: f64,
    pub points: usize,
}

impl Default for SoftModeConfig {
    fn default() -> Self {
        SoftModeConfig { powers: vec![130.0, 160.0, 190.0], half_range_k: 2.0, points: 401 }
    }
}

/// Parameters whose equilibrium is used as the linearization point instead
/// of the run's own equilibrium.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cooperativity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pump_power: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluctuationsConfig {
    /// Modes with `|c_n|` below this (units of `omega_a`) are dropped.
    pub mode_floor: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    /// Frequency grid in units of the axial frequency.
    pub nu_min: f64,
    pub nu_max: f64,
    pub points: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig { nu_min: -3.0, nu_max: 3.0, points: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NegativityConfig {
    /// Phonon modes (1-based among the retained ones) paired with the cavity;
    /// all retained modes when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phonons: Option<Vec<usize>>,
    /// Reference value reported next to the computed one.
    pub target: f64,
}

impl Default for NegativityConfig {
    fn default() -> Self {
        NegativityConfig { phonons: None, target: 0.15 }
    }
}

/// A config turned into the model it describes.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: SystemParams,
    pub model: Model,
    /// Bare linear chain, trap units.
    pub chain: IonConfiguration,
    /// `sum_j exp(-(y_j - y0)^2 / sigma^2)` of `chain`.
    pub n_eff: f64,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn check(&self) -> Result<()> {
        let s = &self.system;
        let bad = |msg: &str| Err(Error::Config(msg.to_string()));
        if s.n_ions == 0 {
            return bad("system.n_ions must be at least 1");
        }
        for (name, v) in [
            ("mass_amu", s.mass_amu),
            ("axial_mhz", s.axial_mhz),
            ("transverse_mhz", s.transverse_mhz),
            ("wavelength_nm", s.wavelength_nm),
            ("kappa_mhz", s.kappa_mhz),
            ("gamma_mhz", s.gamma_mhz),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("system.{name} must be positive, got {v}")));
            }
        }
        if !(s.pump_power.is_finite() && s.pump_power >= 0.0) {
            return bad("system.pump_power must be >= 0");
        }
        match (s.waist_um, s.waist_per_spacing) {
            (Some(_), Some(_)) => return bad("give only one of system.waist_um and system.waist_per_spacing"),
            (None, None) => return bad("system.waist_um or system.waist_per_spacing is required"),
            (Some(w), None) | (None, Some(w)) if !(w > 0.0 && w.is_finite()) => {
                return bad("mode waist must be positive")
            }
            _ => {}
        }
        if s.waist_per_spacing.is_some() && s.n_ions < 2 {
            return bad("system.waist_per_spacing needs at least two ions");
        }
        if s.mode_center_um.is_some() && s.mode_anchor.is_some() {
            return bad("give only one of system.mode_center_um and system.mode_anchor");
        }
        match (s.g0_mhz, s.cooperativity) {
            (Some(_), Some(_)) => return bad("give only one of system.g0_mhz and system.cooperativity"),
            (None, None) => return bad("system.g0_mhz or system.cooperativity is required"),
            (Some(v), None) | (None, Some(v)) if !(v >= 0.0 && v.is_finite()) => {
                return bad("coupling strength must be >= 0")
            }
            _ => {}
        }
        if s.delta0_mhz == 0.0 || !s.delta0_mhz.is_finite() {
            return bad("system.delta0_mhz must be nonzero");
        }
        if self.bath.temperature_mk.is_some() && self.bath.occupation.is_some() {
            return bad("give only one of bath.temperature_mk and bath.occupation");
        }
        if self.sweep.steps == 0 || self.spectrum.points == 0 || self.softmode.points < 3 {
            return bad("grids need at least one point (three for softmode)");
        }
        Ok(())
    }

    /// Builds the SI parameter set and the trap-unit model.
    pub fn resolve(&self) -> Result<Resolved> {
        self.resolve_with(None)
    }

    /// As [`Self::resolve`], with cooperativity and pump power optionally replaced.
    pub fn resolve_with(&self, reference: Option<&ReferenceConfig>) -> Result<Resolved> {
        let s = &self.system;
        let chain = free_space_chain(s.n_ions)?;
        let mass = s.mass_amu * constants::ATOMIC_MASS;
        let charge = s.charge_e * constants::ELEMENTARY_CHARGE;
        let omega_a = mhz(s.axial_mhz);
        let length = crate::params::Units::new(mass, charge, omega_a).length;
        let ys: Vec<f64> = chain.y().collect();
        let waist = match (s.waist_um, s.waist_per_spacing) {
            (Some(w), _) => w * 1e-6,
            (None, Some(f)) => f * chain.central_spacing() * length,
            _ => unreachable!("checked"),
        };
        let y0 = match (s.mode_center_um, s.mode_anchor) {
            (Some(y), _) => y * 1e-6,
            (None, Some(ModeAnchor::LeftEdge)) => ys[0] * length,
            (None, Some(ModeAnchor::RightEdge)) => ys[ys.len() - 1] * length,
            _ => 0.0,
        };
        let temperature = self.bath.temperature_mk.map(|t| t * 1e-3).unwrap_or(DEFAULT_BATH_TEMPERATURE);
        let damping = self.bath.damping_mhz.map(mhz).unwrap_or(1e-3 * omega_a);
        let occupation = match self.bath.occupation {
            Some(n) => Occupation::Fixed(PerMode::Uniform(n)),
            None => Occupation::Thermal { thermal_frequency: constants::BOLTZMANN * temperature / constants::HBAR },
        };
        let mut params = SystemParams {
            n_ions: s.n_ions,
            mass,
            charge,
            omega_axial: omega_a,
            omega_transverse: mhz(s.transverse_mhz),
            g0: 0.0,
            wavenumber: 2.0 * PI / (s.wavelength_nm * 1e-9),
            waist,
            mode_center: y0,
            delta0: mhz(s.delta0_mhz),
            delta_c: mhz(s.delta_c_mhz),
            kappa: mhz(s.kappa_mhz),
            gamma: mhz(s.gamma_mhz),
            eta: 0.0,
            bath: Bath { damping: PerMode::Uniform(damping), occupation },
        };
        let neff = n_eff(&params.to_model()?, &chain);
        let cooperativity = reference.and_then(|r| r.cooperativity).or(s.cooperativity);
        params.g0 = match (cooperativity, s.g0_mhz) {
            (Some(c), _) => {
                if !(neff > 0.0) {
                    return Err(Error::Config("no ion overlaps the cavity mode".into()));
                }
                (c * params.kappa * params.delta0.abs() / neff).sqrt()
            }
            (None, Some(g)) => mhz(g),
            _ => unreachable!("checked"),
        };
        params.set_pump_power(reference.and_then(|r| r.pump_power).unwrap_or(s.pump_power));
        let model = params.to_model()?;
        Ok(Resolved { params, model, chain, n_eff: neff })
    }

    pub fn equilibrium_options(&self) -> EquilibriumOptions {
        EquilibriumOptions {
            grad_tol: self.equilibrium.grad_tol,
            max_iter: self.equilibrium.max_iter,
            ..EquilibriumOptions::default()
        }
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            power_min: self.sweep.power_min,
            power_max: self.sweep.power_max,
            steps: self.sweep.steps,
            noise: self.sweep.noise,
            seed: self.seed,
            equilibrium: self.equilibrium_options(),
        }
    }
}

fn system(n_ions: usize, axial: f64, transverse: f64) -> SystemConfig {
    SystemConfig {
        n_ions,
        mass_amu: calcium_amu(),
        charge_e: 1.0,
        axial_mhz: axial,
        transverse_mhz: transverse,
        wavelength_nm: 866.0,
        waist_um: Some(14.0),
        waist_per_spacing: None,
        mode_center_um: Some(0.0),
        mode_anchor: None,
        g0_mhz: Some(9.4),
        cooperativity: None,
        delta0_mhz: 500.0,
        delta_c_mhz: 0.0,
        kappa_mhz: 0.5,
        gamma_mhz: 10.0,
        pump_power: 0.0,
    }
}

fn with_system(system: SystemConfig) -> RunConfig {
    RunConfig {
        out_dir: default_out_dir(),
        seed: 0,
        system,
        bath: BathConfig::default(),
        equilibrium: EquilibriumConfig::default(),
        sweep: SweepConfig::default(),
        softmode: SoftModeConfig::default(),
        fluctuations: FluctuationsConfig::default(),
        spectrum: SpectrumConfig::default(),
        negativity: NegativityConfig::default(),
    }
}

/// Sixty-ion chain with its centre at a cavity antinode, pump off.
pub fn long_chain() -> RunConfig {
    with_system(system(60, 0.1, 2.26))
}

/// Three ions with the mode on the right-hand edge ion; see
/// [`crate::scenario::edge_coupled_trio`].
pub fn edge_coupled_trio(cooperativity: f64, pump_power: f64) -> RunConfig {
    let mut s = system(3, 1.0, 1.57);
    s.kappa_mhz = 1.0;
    s.waist_um = None;
    s.waist_per_spacing = Some(0.65);
    s.mode_center_um = None;
    s.mode_anchor = Some(ModeAnchor::RightEdge);
    s.g0_mhz = None;
    s.cooperativity = Some(cooperativity);
    s.pump_power = pump_power;
    let mut cfg = with_system(s);
    cfg.equilibrium.seed = Seed::Zigzag;
    cfg.spectrum = SpectrumConfig { nu_min: -3.0, nu_max: 3.0, points: 1000 };
    cfg
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn presets_match_library_scenarios() {
        let r = long_chain().resolve().unwrap();
        assert_eq!(r.params, crate::scenario::long_chain());
        let r = edge_coupled_trio(3.0, 0.22).resolve().unwrap();
        let lib = crate::scenario::edge_coupled_trio(3.0, 0.22).unwrap();
        assert!((r.params.g0 / lib.g0 - 1.0).abs() < 1e-12);
        assert!((r.params.waist / lib.waist - 1.0).abs() < 1e-12);
        assert!((r.params.mode_center / lib.mode_center - 1.0).abs() < 1e-12);
    }

    #[test]
    fn minimal_file() {
        let text = r#"
            [system]
            n_ions = 1
            axial_mhz = 1.0
            transverse_mhz = 3.0
            wavelength_nm = 866
            waist_um = 10
            g0_mhz = 1
            delta0_mhz = 100
            kappa_mhz = 1
            gamma_mhz = 10
        "#;
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.out_dir, "out");
        assert_eq!(c.softmode.powers, vec![130.0, 160.0, 190.0]);
        assert_eq!(c.resolve().unwrap().model.n_ions, 1);
    }

    #[test]
    fn rejects_bad_input() {
        let base = long_chain().to_toml();
        assert!(matches!(RunConfig::parse(&base.replace("n_ions = 60", "n_ions = 0")), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse(&(base.clone() + "\n[typo]\nx = 1\n")), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse(&base.replace("g0_mhz = 9.4", "")), Err(Error::Config(_))));
        assert!(matches!(
            RunConfig::parse(&base.replace("delta0_mhz = 500.0", "delta0_mhz = 0.0")),
            Err(Error::Config(_))
        ));
        assert!(matches!(RunConfig::parse("not toml ["), Err(Error::Config(_))));
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            1usize..80,
            0.01f64..10.0,
            0.1f64..50.0,
            prop::option::of(0.0f64..10.0),
            prop::option::of(0usize..3),
            -1e3f64..1e3,
            0.0f64..500.0,
            any::<u64>(),
            prop::option::of(0.0f64..5.0),
        )
            .prop_map(|(n, ax, tr, coop, anchor, dc, p, seed, occ)| {
                let mut c = long_chain();
                c.seed = seed;
                c.system.n_ions = n;
                c.system.axial_mhz = ax;
                c.system.transverse_mhz = tr;
                if let Some(coop) = coop {
                    c.system.g0_mhz = None;
                    c.system.cooperativity = Some(coop);
                }
                if let Some(a) = anchor {
                    c.system.mode_center_um = None;
                    c.system.mode_anchor = Some([ModeAnchor::Centre, ModeAnchor::LeftEdge, ModeAnchor::RightEdge][a]);
                }
                c.system.delta_c_mhz = dc;
                c.system.pump_power = p;
                c.bath.occupation = occ;
                if occ.is_some() {
                    c.fluctuations.reference = Some(ReferenceConfig { cooperativity: coop, pump_power: Some(p / 2.0) });
                    c.negativity.phonons = Some(vec![1, n]);
                }
                c
            })
    }

    proptest! {
        #[test]
        fn toml_round_trip(cfg in arb_config()) {
            let text = cfg.to_toml();
            let back = RunConfig::parse(&text).unwrap();
            prop_assert_eq!(&back, &cfg);
            prop_assert_eq!(back.to_toml(), text);
        }
    }
}
