use crate::crystal::{IonConfiguration, Potential};
use crate::error::{Error, Result};
use crate::params::Model;
use nalgebra::SymmetricEigen;

/// Zigzag-mode potential of `n` equidistant, uniformly illuminated ions:
///
/// `V_s(x_s) = omega_s^2 x_s^2 / 2 + (hbar eta^2/kappa) atan(C cos^2(k x_s / sqrt(n)))`
///
/// with `x_s = sum_j (-1)^j x_j / sqrt(n)`. Trap units, unit mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformSoftMode {
    pub n_ions: usize,
    pub omega_s: f64,
    pub k: f64,
    pub hbar: f64,
    pub kappa: f64,
    pub eta: f64,
    pub cooperativity: f64,
}

impl UniformSoftMode {
    /// Uses `omega_s^2 = beta^2 - beta_c^2` and the cooperativity of all
    /// `n_ions` ions sitting at antinodes.
    pub fn from_model(model: &Model, beta_c: f64) -> Result<Self> {
        let ws2 = model.beta * model.beta - beta_c * beta_c;
        if !(ws2 > 0.0) {
            return Err(Error::BelowCritical(format!(
                "omega_t/omega_a = {} does not exceed omega_tc/omega_a = {}",
                model.beta, beta_c
            )));
        }
        Ok(UniformSoftMode {
            n_ions: model.n_ions,
            omega_s: ws2.sqrt(),
            k: model.k,
            hbar: model.hbar,
            kappa: model.kappa,
            eta: model.eta,
            cooperativity: model.g0 * model.g0 * model.n_ions as f64 / (model.kappa * model.delta0.abs()),
        })
    }

    pub fn with_cooperativity(mut self, c: f64) -> Self {
        self.cooperativity = c;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn recoil_frequency(&self) -> f64 {
        0.5 * self.hbar * self.k * self.k
    }

    pub fn potential(&self, x_s: f64) -> f64 {
        let c = (self.k * x_s / (self.n_ions as f64).sqrt()).cos();
        let depth = self.hbar * self.eta * self.eta / self.kappa;
        0.5 * self.omega_s * self.omega_s * x_s * x_s + depth * (self.cooperativity * c * c).atan()
    }

    /// Curvature at `x_s = 0` by a central second difference of [`Self::potential`].
    pub fn numeric_curvature(&self) -> f64 {
        let h = 1e-3 * (self.n_ions as f64).sqrt() / self.k;
        (self.potential(h) + self.potential(-h) - 2.0 * self.potential(0.0)) / (h * h)
    }

    /// Closed-form threshold `eta_th^2 = n (1 + C^2)/(4C) omega_s^2 kappa / omega_R`.
    pub fn threshold_eta_sq(&self) -> Result<f64> {
        let c = self.cooperativity;
        if !(c > 0.0) {
            return Err(Error::ZeroCooperativity);
        }
        Ok(self.n_ions as f64 * (1.0 + c * c) / (4.0 * c) * self.omega_s * self.omega_s * self.kappa
            / self.recoil_frequency())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub eta_sq_analytic: f64,
    /// Where the numerically evaluated curvature at `x_s = 0` changes sign.
    pub eta_sq_numeric: f64,
}

impl Threshold {
    pub fn eta(&self) -> f64 {
        self.eta_sq_analytic.sqrt()
    }

    pub fn relative_disagreement(&self) -> f64 {
        (self.eta_sq_numeric - self.eta_sq_analytic).abs() / self.eta_sq_analytic
    }
}

/// Pump strength above which the soft mode of the uniform model is unstable.
pub fn instability_threshold(mode: &UniformSoftMode) -> Result<Threshold> {
    let analytic = mode.threshold_eta_sq()?;
    let curvature = |eta_sq: f64| mode.with_eta(eta_sq.sqrt()).numeric_curvature();
    let mut lo = 0.0;
    let mut hi = analytic.max(1e-300);
    let mut guard = 0;
    while curvature(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(Error::BracketFailure("curvature never changes sign".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if curvature(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(Threshold { eta_sq_analytic: analytic, eta_sq_numeric: 0.5 * (lo + hi) })
}

/// Total potential along the softest transverse mode of a linear chain.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftModeCurve {
    /// Transverse displacement of the reference ion (trap units).
    pub displacement: Vec<f64>,
    /// `V_tot` relative to the undisplaced configuration.
    pub energy: Vec<f64>,
    /// Displacements at interior local minima of `energy`.
    pub minima: Vec<f64>,
    /// Index of the ion whose displacement parameterizes the curve.
    pub reference_ion: usize,
    /// Mode shape, normalized to one on the reference ion.
    pub direction: Vec<f64>,
}

impl SoftModeCurve {
    pub fn minima_count(&self) -> usize {
        self.minima.len()
    }
}

/// Evaluates `V_tot` while displacing the chain rigidly along the lowest
/// transverse eigenvector of the full Hessian at `base`. The displacement
/// is that of the ion nearest the mode centre.
pub fn soft_mode_potential_finite(
    model: &Model,
    base: &IonConfiguration,
    displacements: &[f64],
) -> Result<SoftModeCurve> {
    let pot = Potential::new(model);
    let q0 = base.to_flat();
    pot.check_separation(&q0)?;
    let n = base.len();
    let h = pot.hessian(&q0);
    let block = h.view((0, 0), (n, n)).clone_owned();
    let eig = SymmetricEigen::new(block);
    let lowest = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
    let v = eig.eigenvectors.column(lowest);
    let reference_ion = base.nearest_to(model.y0);
    let anchor = if v[reference_ion].abs() > 1e-12 {
        v[reference_ion]
    } else {
        // reference ion sits on a node of the mode; fall back to the largest component
        v.iter().copied().fold(0.0, |m: f64, c| if c.abs() > m.abs() { c } else { m })
    };
    let direction: Vec<f64> = v.iter().map(|c| c / anchor).collect();
    let e0 = pot.energy(&q0);
    let mut q = q0.clone();
    let energy: Vec<f64> = displacements
        .iter()
        .map(|&d| {
            for j in 0..n {
                q[j] = q0[j] + d * direction[j];
            }
            pot.energy(&q) - e0
        })
        .collect();
    let minima = energy
        .windows(3)
        .enumerate()
        .filter(|(_, w)| w[1] < w[0] && w[1] < w[2])
        .map(|(i, _)| displacements[i + 1])
        .collect();
    Ok(SoftModeCurve { displacement: displacements.to_vec(), energy, minima, reference_ion, direction })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mode(c: f64) -> UniformSoftMode {
        UniformSoftMode { n_ions: 10, omega_s: 0.5, k: 100.0, hbar: 1e-5, kappa: 1.0, eta: 0.0, cooperativity: c }
    }

    #[test]
    fn dark_cavity_is_parabola() {
        let m = mode(2.0);
        for x in [-0.1, 0.0, 0.05] {
            assert!((m.potential(x) - 0.125 * x * x).abs() < 1e-15);
        }
    }

    #[test]
    fn value_at_origin() {
        let m = mode(2.0).with_eta(30.0);
        let depth = m.hbar * 900.0 / m.kappa;
        assert!((m.potential(0.0) - depth * 2f64.atan()).abs() < 1e-15);
    }

    #[test]
    fn prefactor_is_smallest_at_unit_cooperativity() {
        let th = |c: f64| mode(c).threshold_eta_sq().unwrap();
        let best = th(1.0);
        for c in [0.5, 0.9, 1.1, 2.0] {
            assert!(th(c) > best);
        }
        assert!((best / (mode(1.0).omega_s.powi(2) * 1.0 / mode(1.0).recoil_frequency()) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn zero_cooperativity_has_no_threshold() {
        assert!(matches!(instability_threshold(&mode(0.0)), Err(Error::ZeroCooperativity)));
        // divergence as C -> 0
        assert!(mode(1e-6).threshold_eta_sq().unwrap() > 1e5 * mode(1.0).threshold_eta_sq().unwrap());
    }

    #[test]
    fn below_critical_is_an_error() {
        let m = Model::free_space(3, 1.5);
        assert!(matches!(UniformSoftMode::from_model(&m, 1.6), Err(Error::BelowCritical(_))));
    }
}
