//! Total potential along the softest transverse mode of the linear chain,
//! and the optical instability threshold of the uniform soft-mode model.

use ioncav::cli::long_chain;
use ioncav::crystal::{critical_frequency, stationary_point};
use ioncav::fluctuations::frequency_grid;
use ioncav::structural::{instability_threshold, soft_mode_potential_finite, UniformSoftMode};

fn main() -> ioncav::error::Result<()> {
    let cfg = long_chain();
    let r = cfg.resolve()?;
    let grid = frequency_grid(-2.0 / r.model.k, 2.0 / r.model.k, 401);
    for power in [130.0, 160.0, 190.0] {
        let m = r.model.clone().with_pump_power(power);
        let base = stationary_point(&m, &r.chain, &cfg.equilibrium_options())?;
        let curve = soft_mode_potential_finite(&m, &base.config, &grid)?;
        let kx: Vec<String> = curve.minima.iter().map(|x| format!("{:.3}", x * r.model.k)).collect();
        println!("P = {power}: {} minima at k x = [{}]", curve.minima_count(), kx.join(", "));
    }
    let beta_c = critical_frequency(&r.model)?;
    for c in [0.5, 1.0, 2.0, 3.0] {
        let mode = UniformSoftMode::from_model(&r.model, beta_c)?.with_cooperativity(c);
        let t = instability_threshold(&mode)?;
        println!("C = {c}: eta_th^2 analytic {:.6e}, numeric {:.6e}", t.eta_sq_analytic, t.eta_sq_numeric);
    }
    Ok(())
}
