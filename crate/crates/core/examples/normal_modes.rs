//! Normal modes of a pumped three-ion zigzag and their coupling to the cavity.

use ioncav::cli::{edge_coupled_trio, linearization_point};

fn main() -> ioncav::error::Result<()> {
    let lp = linearization_point(&edge_coupled_trio(0.5, 1.0))?;
    println!("structure: {}", lp.equilibrium.config.structure());
    for n in 0..lp.modes.len() {
        println!(
            "mode {n}: omega = {:.4}, c = {:+.3e}, Lamb-Dicke {:.4}, transverse weight {:.2}",
            lp.modes.frequencies[n],
            lp.modes.couplings[n],
            lp.modes.lamb_dicke(&lp.resolved.model, n),
            lp.modes.transverse_weight(n)
        );
    }
    Ok(())
}
