//! Logarithmic negativity between the cavity field and the crystal motion
//! at several reservoir temperatures.

use ioncav::cli::{edge_coupled_trio, linearization_point, ReferenceConfig};
use ioncav::fluctuations::{log_negativity, steady_state, Partition};

fn main() -> ioncav::error::Result<()> {
    for mk in [0.1, 0.5, 1.0, 2.0] {
        let mut cfg = edge_coupled_trio(3.0, 0.22);
        cfg.fluctuations.reference = Some(ReferenceConfig { cooperativity: Some(0.5), pump_power: Some(1.0) });
        cfg.bath.temperature_mk = Some(mk);
        let lp = linearization_point(&cfg)?;
        let ss = steady_state(lp.dynamics)?;
        let e = log_negativity(&ss.covariance, &Partition::cavity_vs_phonons(lp.modes.len()))?;
        println!("T = {mk} mK: E_N = {:.4}, cavity photons {:.3e}", e.value, ss.occupation(0));
    }
    Ok(())
}
