//! Equilibrium of a bare three-ion crystal and its normal modes.

use ioncav::crystal::free_space_chain;
use ioncav::fluctuations::normal_modes;
use ioncav::params::Model;

fn main() -> ioncav::error::Result<()> {
    let chain = free_space_chain(3)?;
    println!("axial positions (l): {:?}", chain.y().collect::<Vec<_>>());
    println!("expected spacing (5/4)^(1/3) = {:.12}", (5.0f64 / 4.0).cbrt());
    let modes = normal_modes(&Model::free_space(3, 4.0), &chain)?;
    for (n, w) in modes.frequencies.iter().enumerate() {
        println!("mode {n}: omega = {w:.10} omega_a, transverse weight {:.3}", modes.transverse_weight(n));
    }
    Ok(())
}
