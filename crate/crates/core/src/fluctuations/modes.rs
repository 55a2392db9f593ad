use crate::crystal::{IonConfiguration, MeanField, Potential};
use crate::error::{Error, Result};
use crate::params::Model;
use nalgebra::{DMatrix, SymmetricEigen};

/// Small oscillations of the crystal about an equilibrium with the photon
/// number frozen at its mean-field value.
#[derive(Debug, Clone)]
pub struct NormalModes {
    /// Ascending angular frequencies `omega_n` (units of `omega_a`).
    pub frequencies: Vec<f64>,
    /// Orthogonal `2N x 2N` matrix. Column `n` is mode `n`; rows `0..N`
    /// are the `x` block and rows `N..2N` the `y` block.
    pub vectors: DMatrix<f64>,
    /// Zero-point lengths `sqrt(hbar / (2 omega_n))`.
    pub zero_point: Vec<f64>,
    /// Optomechanical couplings `c_n` per unit field amplitude.
    pub couplings: Vec<f64>,
    /// Index of each column among all `2N` modes of the crystal.
    pub indices: Vec<usize>,
    pub mean_field: MeanField,
}

impl NormalModes {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Largest deviation of `M^T M` from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        let p = self.vectors.transpose() * &self.vectors;
        let n = p.nrows();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (p[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    /// Share of mode `n` carried by the transverse (`x`) coordinates.
    pub fn transverse_weight(&self, n: usize) -> f64 {
        let half = self.vectors.nrows() / 2;
        (0..half).map(|i| self.vectors[(i, n)].powi(2)).sum()
    }

    /// Keeps only modes with `|c_n| >= floor`.
    pub fn truncated(&self, floor: f64) -> NormalModes {
        let keep: Vec<usize> = (0..self.len()).filter(|&n| self.couplings[n].abs() >= floor).collect();
        NormalModes {
            frequencies: keep.iter().map(|&n| self.frequencies[n]).collect(),
            vectors: self.vectors.select_columns(keep.iter()),
            zero_point: keep.iter().map(|&n| self.zero_point[n]).collect(),
            couplings: keep.iter().map(|&n| self.couplings[n]).collect(),
            indices: keep.iter().map(|&n| self.indices[n]).collect(),
            mean_field: self.mean_field,
        }
    }

    /// Lamb-Dicke parameter `k B_n0 max_j |M_jn^(x)|` of mode `n`.
    pub fn lamb_dicke(&self, model: &Model, n: usize) -> f64 {
        let half = self.vectors.nrows() / 2;
        let mx = (0..half).map(|i| self.vectors[(i, n)].abs()).fold(0.0, f64::max);
        model.k * self.zero_point[n] * mx
    }
}

/// Diagonalizes the fixed-photon-number Hessian at `equilibrium`.
pub fn normal_modes(model: &Model, equilibrium: &IonConfiguration) -> Result<NormalModes> {
    let pot = Potential::new(model);
    let q = equilibrium.to_flat();
    pot.check_separation(&q)?;
    let h = pot.hessian_fixed_photon_number(&q);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let dim = q.len();
    let mut vectors = DMatrix::zeros(dim, dim);
    let mut frequencies = Vec::with_capacity(dim);
    for (col, &i) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[i];
        if !(lambda > 0.0) {
            return Err(Error::UnstableConfiguration { mode: col, curvature: lambda });
        }
        frequencies.push(lambda.sqrt());
        let v = eig.eigenvectors.column(i);
        // sign convention: largest component positive
        let pivot = v.iter().copied().fold(0.0, |m: f64, c| if c.abs() > m.abs() { c } else { m });
        let s = if pivot < 0.0 { -1.0 } else { 1.0 };
        for r in 0..dim {
            vectors[(r, col)] = s * v[r];
        }
    }
    let zero_point = frequencies.iter().map(|w| (model.hbar / (2.0 * w)).sqrt()).collect();
    let mean_field = MeanField::from_shift(model, pot.u0(&q));
    let mut modes = NormalModes {
        frequencies,
        vectors,
        zero_point,
        couplings: Vec::new(),
        indices: (0..dim).collect(),
        mean_field,
    };
    modes.couplings = couplings(model, equilibrium, &modes)?;
    Ok(modes)
}

/// `c_n = (B_n0 / Delta0) sum_j [M_jn^(x) d_xj g_j^2 + M_jn^(y) d_yj g_j^2]`
/// with `g_j = g0 cos(k x_j) exp(-(y_j - y0)^2 / (2 sigma^2))`.
pub fn couplings(model: &Model, equilibrium: &IonConfiguration, modes: &NormalModes) -> Result<Vec<f64>> {
    if model.delta0 == 0.0 {
        return Err(Error::SingularDetuning);
    }
    let n = equilibrium.len();
    if modes.vectors.nrows() != 2 * n {
        return Err(Error::Dimension("mode matrix does not match the configuration".into()));
    }
    let g0sq = model.g0 * model.g0;
    let inv_s2 = 1.0 / (model.sigma * model.sigma);
    // derivatives of g_j^2 = g0^2 cos^2(k x_j) exp(-(y_j-y0)^2/sigma^2)
    let mut dg2 = vec![0.0; 2 * n];
    for (j, p) in equilibrium.positions().iter().enumerate() {
        let kx = model.k * p[0];
        let env = (-(p[1] - model.y0).powi(2) * inv_s2).exp();
        dg2[j] = g0sq * (-model.k * (2.0 * kx).sin()) * env;
        dg2[n + j] = g0sq * kx.cos().powi(2) * env * (-2.0 * (p[1] - model.y0) * inv_s2);
    }
    Ok((0..modes.len())
        .map(|m| {
            let proj: f64 = (0..2 * n).map(|r| modes.vectors[(r, m)] * dg2[r]).sum();
            modes.zero_point[m] / model.delta0 * proj
        })
        .collect())
}
