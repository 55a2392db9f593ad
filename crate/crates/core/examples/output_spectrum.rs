//! Output spectrum of the cavity light: closed form against the
//! transfer-function solution, and line-shape classification.

use ioncav::cli::{edge_coupled_trio, linearization_point, ReferenceConfig};
use ioncav::fluctuations::{
    frequency_grid, has_fano_line, max_relative_difference, output_spectrum_analytic, output_spectrum_numeric,
    sideband_shapes,
};

fn main() -> ioncav::error::Result<()> {
    let weak = edge_coupled_trio(0.5, 1.0);
    let mut strong = edge_coupled_trio(3.0, 0.22);
    strong.fluctuations.reference = Some(ReferenceConfig { cooperativity: Some(0.5), pump_power: Some(1.0) });
    let nu = frequency_grid(-3.0, 3.0, 1000);
    for (name, cfg) in [("C = 0.5, P = 1", weak), ("C = 3, P = 0.22", strong)] {
        let lp = linearization_point(&cfg)?;
        let a = output_spectrum_analytic(&lp.resolved.model, &lp.modes.mean_field, &lp.modes, &nu);
        let n = output_spectrum_numeric(&lp.dynamics, &nu)?;
        let shapes = sideband_shapes(&lp.dynamics);
        println!(
            "{name}: max relative difference {:.2e}, Fano line: {}",
            max_relative_difference(&a, &n),
            has_fano_line(&shapes)
        );
        for l in shapes.iter().filter(|l| l.visible) {
            println!("  line at {:+.4}: extrema {}, contrast {:.3}", l.centre, l.extrema, l.contrast);
        }
    }
    Ok(())
}
