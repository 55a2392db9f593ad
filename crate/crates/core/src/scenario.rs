//! Ready-made parameter sets for 40Ca+ crystals in an 866 nm cavity.

use crate::crystal::{free_space_chain, n_eff, IonConfiguration};
use crate::error::Result;
use crate::params::{constants, cooperativity, mhz, Bath, SystemParams};
use std::f64::consts::PI;

pub const WAVELENGTH: f64 = 866e-9;

/// Default reservoir temperature (kelvin), typical of Doppler-cooled 40Ca+.
pub const DEFAULT_BATH_TEMPERATURE: f64 = 0.5e-3;

fn calcium(n_ions: usize, axial_mhz: f64, transverse_mhz: f64) -> SystemParams {
    SystemParams {
        n_ions,
        mass: constants::CALCIUM_40_MASS,
        charge: constants::ELEMENTARY_CHARGE,
        omega_axial: mhz(axial_mhz),
        omega_transverse: mhz(transverse_mhz),
        g0: mhz(9.4),
        wavenumber: 2.0 * PI / WAVELENGTH,
        waist: 14e-6,
        mode_center: 0.0,
        delta0: mhz(500.0),
        delta_c: 0.0,
        kappa: mhz(0.5),
        gamma: mhz(10.0),
        eta: 0.0,
        bath: Bath::thermal(mhz(axial_mhz), DEFAULT_BATH_TEMPERATURE),
    }
}

/// Sixty ions at 0.1 MHz axial / 2.26 MHz transverse confinement with the
/// central region (waist 14 um) at a cavity antinode. Pump off.
pub fn long_chain() -> SystemParams {
    calcium(60, 0.1, 2.26)
}

/// `long_chain` at pump power `P`.
pub fn long_chain_at(power: f64) -> SystemParams {
    let mut p = long_chain();
    p.set_pump_power(power);
    p
}

/// Axial equilibrium of the bare chain, in trap units.
pub fn bare_chain(params: &SystemParams) -> Result<IonConfiguration> {
    free_space_chain(params.n_ions)
}

/// Effective number of coupled ions for the bare linear chain at an antinode.
pub fn linear_n_eff(params: &SystemParams) -> Result<f64> {
    let model = params.to_model()?;
    Ok(n_eff(&model, &bare_chain(params)?))
}

pub fn linear_cooperativity(params: &SystemParams) -> Result<f64> {
    cooperativity(params.g0, params.kappa, params.delta0, linear_n_eff(params)?)
}

/// Three ions with `omega_a = kappa = 2 pi x 1 MHz`, `omega_t = 2 pi x 1.57 MHz`,
/// and a mode of waist 0.65 times the linear spacing centred on the
/// right-hand edge ion. `g0` is chosen to give the requested cooperativity
/// for the linear chain; the pump is set to power `P`.
pub fn edge_coupled_trio(target_cooperativity: f64, power: f64) -> Result<SystemParams> {
    let mut p = calcium(3, 1.0, 1.57);
    p.kappa = mhz(1.0);
    let units = p.units();
    let chain = free_space_chain(3)?;
    let ys: Vec<f64> = chain.y().collect();
    let spacing = (ys[2] - ys[1]) * units.length;
    p.waist = 0.65 * spacing;
    p.mode_center = ys[2] * units.length;
    let neff = linear_n_eff(&p)?;
    p.g0 = (target_cooperativity * p.kappa * p.delta0.abs() / neff).sqrt();
    p.set_pump_power(power);
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trio_effective_ion_number() {
        let p = edge_coupled_trio(3.0, 0.22).unwrap();
        let neff = linear_n_eff(&p).unwrap();
        assert!((neff - 1.1).abs() < 0.02, "{neff}");
        assert!((linear_cooperativity(&p).unwrap() - 3.0).abs() < 1e-12);
    }
}
