//! Critical transverse frequency of the linear-zigzag transition versus ion number.

use ioncav::crystal::critical_frequency;
use ioncav::params::Model;

fn main() -> ioncav::error::Result<()> {
    for n in [2, 3, 5, 10, 20, 60] {
        let beta_c = critical_frequency(&Model::free_space(n, 1.0))?;
        println!("N = {n:3}: omega_tc / omega_a = {beta_c:.6}");
    }
    Ok(())
}
