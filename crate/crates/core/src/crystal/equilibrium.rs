use super::minimize::{bfgs, BfgsOptions};
use super::potential::{MeanField, Potential};
use super::IonConfiguration;
use crate::error::{Error, Result};
use crate::params::Model;
use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Debug, Clone)]
pub struct EquilibriumOptions {
    pub grad_tol: f64,
    pub max_iter: usize,
    /// How many times a saddle is kicked along its unstable direction
    /// before giving up.
    pub max_escapes: usize,
    /// Lowest Hessian eigenvalue accepted as "non-negative".
    pub curvature_tol: f64,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        EquilibriumOptions { grad_tol: 1e-10, max_iter: 100_000, max_escapes: 8, curvature_tol: 1e-8 }
    }
}

/// A verified local minimum of the total potential.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub config: IonConfiguration,
    pub energy: f64,
    pub grad_inf: f64,
    pub lowest_eigenvalue: f64,
    pub iterations: usize,
    pub escapes: usize,
    pub mean_field: MeanField,
}

fn step_caps(model: &Model, n: usize) -> Vec<f64> {
    let transverse = if model.eta != 0.0 && model.g0 != 0.0 { (0.25 / model.k).min(0.1) } else { 0.1 };
    let mut caps = vec![transverse; n];
    caps.extend(std::iter::repeat_n(0.1, n));
    caps
}

fn lowest_eigenpair(h: DMatrix<f64>) -> (f64, Vec<f64>) {
    let eig = SymmetricEigen::new(h);
    let (i, &lambda) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty Hessian");
    (lambda, eig.eigenvectors.column(i).iter().copied().collect())
}

/// Relaxes `guess` to a local minimum of `V_trap + V_Coul + V_eff`.
///
/// Saddles are escaped by displacing along the lowest Hessian eigenvector;
/// the returned configuration has a non-negative Hessian spectrum.
pub fn find_equilibrium(model: &Model, guess: &IonConfiguration, opts: &EquilibriumOptions) -> Result<Equilibrium> {
    model.validate()?;
    if guess.len() != model.n_ions {
        return Err(Error::Dimension(format!("guess has {} ions, model has {}", guess.len(), model.n_ions)));
    }
    let pot = Potential::new(model);
    let mut q = guess.to_flat();
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter { name: "initial_guess", reason: "non-finite coordinate".into() });
    }
    pot.check_separation(&q)?;
    let n = model.n_ions;
    let bopts = BfgsOptions { grad_tol: opts.grad_tol, max_iter: opts.max_iter, max_step: Some(step_caps(model, n)) };
    let kick = (0.1 / model.k).min(0.01);
    let mut total_iter = 0;
    let mut escapes = 0;
    loop {
        let min = bfgs(&pot, &q, &bopts);
        total_iter += min.iterations;
        if !min.converged {
            return Err(Error::NoConvergence { iterations: total_iter, grad_inf: min.grad_inf });
        }
        q = min.x;
        let (lambda, v) = lowest_eigenpair(pot.hessian(&q));
        if lambda >= -opts.curvature_tol {
            let config = IonConfiguration::from_flat(&q);
            let mean_field = MeanField::from_shift(model, pot.u0(&q));
            return Ok(Equilibrium {
                config,
                energy: min.value,
                grad_inf: min.grad_inf,
                lowest_eigenvalue: lambda,
                iterations: total_iter,
                escapes,
                mean_field,
            });
        }
        if escapes >= opts.max_escapes {
            return Err(Error::Saddle { lowest_eigenvalue: lambda });
        }
        escapes += 1;
        let vmax = v.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        for (qi, vi) in q.iter_mut().zip(&v) {
            *qi += kick * vi / vmax;
        }
    }
}

/// Relaxes `guess` to the nearest stationary point without rejecting
/// saddles. Starting from a configuration with all `x_j = 0` at an antinode
/// this yields the linear chain even where it is unstable.
pub fn stationary_point(model: &Model, guess: &IonConfiguration, opts: &EquilibriumOptions) -> Result<Equilibrium> {
    model.validate()?;
    let pot = Potential::new(model);
    let q = guess.to_flat();
    pot.check_separation(&q)?;
    let bopts = BfgsOptions {
        grad_tol: opts.grad_tol,
        max_iter: opts.max_iter,
        max_step: Some(step_caps(model, model.n_ions)),
    };
    let min = bfgs(&pot, &q, &bopts);
    if !min.converged {
        return Err(Error::NoConvergence { iterations: min.iterations, grad_inf: min.grad_inf });
    }
    let (lambda, _) = lowest_eigenpair(pot.hessian(&min.x));
    Ok(Equilibrium {
        config: IonConfiguration::from_flat(&min.x),
        energy: min.value,
        grad_inf: min.grad_inf,
        lowest_eigenvalue: lambda,
        iterations: min.iterations,
        escapes: 0,
        mean_field: MeanField::from_shift(model, pot.u0(&min.x)),
    })
}

/// Evenly spaced ions on the axis, spread roughly like a trapped chain.
pub fn linear_guess(n: usize) -> IonConfiguration {
    let n_f = n as f64;
    let half_length = if n > 1 { (0.75 * n_f * (n_f.ln() + 1.0)).cbrt() } else { 0.0 };
    let positions = (0..n)
        .map(|j| {
            let t = if n > 1 { 2.0 * j as f64 / (n_f - 1.0) - 1.0 } else { 0.0 };
            [0.0, half_length * t]
        })
        .collect();
    IonConfiguration::new(positions)
}

/// Axial equilibrium of `n` ions in the bare trap (`x = 0` for all ions).
pub fn free_space_chain(n: usize) -> Result<IonConfiguration> {
    // Large beta keeps the linear chain stable; axial positions do not depend on it.
    let model = Model::free_space(n, 10.0 * (n as f64 + 1.0));
    Ok(find_equilibrium(&model, &linear_guess(n), &EquilibriumOptions::default())?.config)
}

/// Linear configuration plus alternating transverse offsets of `1 / k`.
pub fn zigzag_guess(model: &Model, linear: &IonConfiguration) -> IonConfiguration {
    let amp = 1.0 / model.k;
    let positions = linear
        .positions()
        .iter()
        .enumerate()
        .map(|(j, p)| [p[0] + if j % 2 == 0 { amp } else { -amp }, p[1]])
        .collect();
    IonConfiguration::new(positions)
}

fn lowest_transverse(beta: f64, chain: &IonConfiguration) -> f64 {
    let n = chain.len();
    let model = Model::free_space(n, beta);
    let h = Potential::new(&model).hessian(&chain.to_flat());
    let block = h.view((0, 0), (n, n)).clone_owned();
    SymmetricEigen::new(block).eigenvalues.iter().fold(f64::INFINITY, |m, &v| m.min(v))
}

/// Free-space critical transverse frequency `omega_tc / omega_a` of the
/// linear-zigzag instability, found by bisection on the lowest transverse
/// curvature of the linear chain.
pub fn critical_frequency(model: &Model) -> Result<f64> {
    if model.eta != 0.0 && model.g0 != 0.0 {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: "critical frequency is defined without the cavity field".into(),
        });
    }
    let n = model.n_ions;
    let chain = free_space_chain(n)?;
    let stable = |beta: f64| lowest_transverse(beta, &chain) > 0.0;
    let mut hi = 1.0;
    let mut tries = 0;
    while !stable(hi) {
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::BracketFailure("no stable transverse frequency found".into()));
        }
    }
    let mut lo = hi / 2.0;
    tries = 0;
    while stable(lo) {
        lo /= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::BracketFailure(format!(
                "linear chain of {n} ions is stable at any transverse frequency"
            )));
        }
    }
    while (hi - lo) > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if stable(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_ion_spacing() {
        let c = free_space_chain(3).unwrap();
        let d = 1.25f64.cbrt();
        let y: Vec<f64> = c.y().collect();
        assert!((y[0] + d).abs() < 1e-10 && y[1].abs() < 1e-10 && (y[2] - d).abs() < 1e-10, "{y:?}");
    }

    #[test]
    fn two_ion_critical_frequency_from_scan() {
        // Brute-force scan of the lowest transverse eigenvalue.
        let chain = free_space_chain(2).unwrap();
        let mut last_unstable = 0.0;
        for i in 1..=4000 {
            let beta = i as f64 * 5e-4;
            if lowest_transverse(beta, &chain) < 0.0 {
                last_unstable = beta;
            }
        }
        let bc = critical_frequency(&Model::free_space(2, 1.0)).unwrap();
        assert!((bc - last_unstable).abs() <= 5e-4, "{bc} vs {last_unstable}");
        assert!((bc - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_ion_has_no_instability() {
        assert!(matches!(critical_frequency(&Model::free_space(1, 1.0)), Err(Error::BracketFailure(_))));
    }

    #[test]
    fn wrong_ion_count() {
        let m = Model::free_space(3, 2.0);
        assert!(matches!(
            find_equilibrium(&m, &linear_guess(2), &EquilibriumOptions::default()),
            Err(Error::Dimension(_))
        ));
    }
}
