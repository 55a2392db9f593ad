//! Pump-power hysteresis of a sixty-ion chain: linear and zigzag branches.

use ioncav::cli::long_chain;
use ioncav::structural::{bistable_window, hysteresis_sweep, reference_intensity, SweepDirection};

fn main() -> ioncav::error::Result<()> {
    let cfg = long_chain();
    let r = cfg.resolve()?;
    let opts = cfg.sweep_options();
    let i1 = reference_intensity(&r.model, &r.chain)?;
    let up = hysteresis_sweep(&r.model, &r.chain, SweepDirection::Up, &opts)?;
    let top =
        up.points.last().and_then(|p| p.outcome.as_ref().ok()).map(|e| e.config.clone()).unwrap_or(r.chain.clone());
    let down = hysteresis_sweep(&r.model, &top, SweepDirection::Down, &opts)?;
    for (u, d) in up.ascending().iter().zip(down.ascending()).step_by(10) {
        let show = |p: &ioncav::structural::SweepPoint| {
            format!(
                "{:>7} {:10.3}",
                p.structure().map(|s| s.to_string()).unwrap_or("failed".into()),
                p.output_intensity().unwrap_or(f64::NAN) / i1
            )
        };
        println!("P = {:6.1}  up: {}  down: {}", u.power, show(u), show(d));
    }
    match bistable_window(&up, &down) {
        Some(w) => println!("bistable for P in [{}, {}]", w.lower, w.upper),
        None => println!("no bistability"),
    }
    Ok(())
}
