//! Ion positions, the trap + Coulomb + cavity potential and its
//! derivatives, and equilibrium search.

mod equilibrium;
pub mod minimize;
mod potential;

pub use equilibrium::{
    critical_frequency, find_equilibrium, free_space_chain, linear_guess, stationary_point, zigzag_guess, Equilibrium,
    EquilibriumOptions,
};
pub use potential::{
    gradient, hessian, hessian_fixed_photon_number, mean_field, n_eff, optical_gradient, total_potential, u0_gradient,
    u0_shift, MeanField, Potential,
};

use serde::{Deserialize, Serialize};

/// Threshold on transverse deviations (trap units) separating linear from
/// buckled structures.
pub const ZIGZAG_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Structure {
    Linear,
    Zigzag,
    Other,
}

impl std::fmt::Display for Structure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Structure::Linear => "linear",
            Structure::Zigzag => "zigzag",
            Structure::Other => "other",
        })
    }
}

/// Positions of the ions in the x-y plane, in trap units. `x` is along the
/// cavity axis, `y` along the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct IonConfiguration {
    positions: Vec<[f64; 2]>,
    structure: Structure,
}

impl IonConfiguration {
    /// Sorts by `y` and classifies.
    pub fn new(mut positions: Vec<[f64; 2]>) -> Self {
        positions.sort_by(|a, b| a[1].total_cmp(&b[1]));
        let structure = classify(&positions);
        IonConfiguration { positions, structure }
    }

    /// Builds from the flat layout `[x_0..x_{N-1}, y_0..y_{N-1}]`.
    pub fn from_flat(coords: &[f64]) -> Self {
        let n = coords.len() / 2;
        Self::new((0..n).map(|j| [coords[j], coords[n + j]]).collect())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.positions.iter().map(|p| p[0]).collect();
        out.extend(self.positions.iter().map(|p| p[1]));
        out
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn x(&self) -> impl Iterator<Item = f64> + '_ {
        self.positions.iter().map(|p| p[0])
    }

    pub fn y(&self) -> impl Iterator<Item = f64> + '_ {
        self.positions.iter().map(|p| p[1])
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    /// Largest transverse deviation from the mean transverse position.
    pub fn buckling(&self) -> f64 {
        let n = self.len().max(1) as f64;
        let mean = self.x().sum::<f64>() / n;
        self.x().map(|x| (x - mean).abs()).fold(0.0, f64::max)
    }

    /// Index of the ion closest to `y`.
    pub fn nearest_to(&self, y: f64) -> usize {
        self.positions
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1[1] - y).abs().total_cmp(&(b.1[1] - y).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Axial spacing between the two ions around the chain centre.
    pub fn central_spacing(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let j = n / 2;
        let a = self.positions[j - 1];
        let b = self.positions[j];
        (b[1] - a[1]).hypot(b[0] - a[0])
    }

    /// Mirror image `x -> -x`.
    pub fn reflected(&self) -> Self {
        Self::new(self.positions.iter().map(|p| [-p[0], p[1]]).collect())
    }
}

fn classify(positions: &[[f64; 2]]) -> Structure {
    if positions.is_empty() {
        return Structure::Linear;
    }
    let n = positions.len() as f64;
    let mean = positions.iter().map(|p| p[0]).sum::<f64>() / n;
    let dev: Vec<f64> = positions.iter().map(|p| p[0] - mean).collect();
    if dev.iter().all(|d| d.abs() < ZIGZAG_EPSILON) {
        return Structure::Linear;
    }
    let alternates = dev
        .windows(2)
        .filter(|w| w[0].abs() >= ZIGZAG_EPSILON && w[1].abs() >= ZIGZAG_EPSILON)
        .all(|w| w[0].signum() != w[1].signum());
    if alternates {
        Structure::Zigzag
    } else {
        Structure::Other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_by_axial_position() {
        let c = IonConfiguration::new(vec![[0.0, 1.0], [0.0, -1.0], [0.0, 0.0]]);
        let ys: Vec<f64> = c.y().collect();
        assert_eq!(ys, vec![-1.0, 0.0, 1.0]);
        assert_eq!(c.structure(), Structure::Linear);
    }

    #[test]
    fn classification() {
        let zz = IonConfiguration::new(vec![[0.01, -1.0], [-0.01, 0.0], [0.01, 1.0]]);
        // mean is 1/300, deviations still alternate
        assert_eq!(zz.structure(), Structure::Zigzag);
        let other = IonConfiguration::new(vec![[0.01, -1.0], [0.01, 0.0], [-0.02, 1.0]]);
        assert_eq!(other.structure(), Structure::Other);
        let small = IonConfiguration::new(vec![[1e-4, -1.0], [-1e-4, 0.0], [0.0, 1.0]]);
        assert_eq!(small.structure(), Structure::Linear);
        // ions below threshold do not break the alternation
        let partial = IonConfiguration::new(vec![[0.0, -2.0], [0.0, -1.0], [0.02, 0.0], [-0.02, 1.0], [0.0, 2.0]]);
        assert_eq!(partial.structure(), Structure::Zigzag);
    }

    #[test]
    fn flat_round_trip() {
        let c = IonConfiguration::new(vec![[0.1, -1.0], [0.2, 0.5]]);
        assert_eq!(IonConfiguration::from_flat(&c.to_flat()), c);
    }
}
