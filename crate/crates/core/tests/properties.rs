use ioncav::cli::{edge_coupled_trio, linearization_point};
use ioncav::crystal::{gradient, total_potential, IonConfiguration};
use ioncav::fluctuations::{analytic_point, steady_state, TransferFunction, PHYSICALITY_TOL};
use ioncav::params::Model;
use proptest::prelude::*;

fn model(k: f64, sigma: f64, y0: f64, delta0: f64, power: f64) -> Model {
    let mut m = Model::free_space(4, 2.5);
    m.k = k;
    m.sigma = sigma;
    m.y0 = y0;
    m.g0 = 3.0;
    m.delta0 = delta0;
    m.kappa = 0.7;
    m.set_pump_power(power);
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Mirror image x -> -x leaves the energy unchanged (the ions sit about an
    /// antinode) and flips the transverse forces.
    #[test]
    fn mirror_symmetry(
        k in 2.0f64..40.0,
        sigma in 0.5f64..3.0,
        y0 in -1.0f64..1.0,
        delta0 in prop_oneof![5.0f64..50.0, -50.0f64..-5.0],
        power in 0.0f64..100.0,
        xs in prop::collection::vec(-0.2f64..0.2, 4),
        gaps in prop::collection::vec(0.7f64..1.5, 4),
    ) {
        let m = model(k, sigma, y0, delta0, power);
        let mut y = -1.5;
        let cfg = IonConfiguration::new(xs.iter().zip(&gaps).map(|(&x, g)| { y += g; [x, y] }).collect());
        let mirror = cfg.reflected();
        let (e, em) = (total_potential(&m, &cfg).unwrap(), total_potential(&m, &mirror).unwrap());
        prop_assert!((e - em).abs() <= 1e-12 * e.abs().max(1.0));
        let (g, gm) = (gradient(&m, &cfg).unwrap(), gradient(&m, &mirror).unwrap());
        let scale = g.iter().fold(1e-12f64, |a, v| a.max(v.abs()));
        for i in 0..4 {
            prop_assert!((g[i] + gm[i]).abs() <= 1e-10 * scale);
            prop_assert!((g[4 + i] - gm[4 + i]).abs() <= 1e-10 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Whenever a steady state exists it obeys the uncertainty principle and
    /// both spectrum evaluations agree.
    #[test]
    fn steady_states_are_physical(
        coop in 0.1f64..3.0,
        power in 0.3f64..1.5,
        temperature_mk in 0.05f64..2.0,
        nu in -3.0f64..3.0,
    ) {
        let mut cfg = edge_coupled_trio(coop, power);
        cfg.bath.temperature_mk = Some(temperature_mk);
        let Ok(lp) = linearization_point(&cfg) else { return Ok(()) };
        let tf = TransferFunction::new(&lp.dynamics);
        prop_assume!(tf.is_ok());
        let numeric = tf.unwrap().spectrum(nu).unwrap();
        let analytic = analytic_point(&lp.dynamics, nu);
        prop_assert!((numeric - analytic).abs() <= 1e-8 * numeric.abs().max(analytic.abs()));
        let ss = steady_state(lp.dynamics).unwrap();
        prop_assert!(ss.uncertainty_margin >= -PHYSICALITY_TOL);
        prop_assert!(ss.residual < 1e-10);
    }
}
