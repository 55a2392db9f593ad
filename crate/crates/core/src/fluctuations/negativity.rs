use super::langevin::{uncertainty_margin, PHYSICALITY_TOL};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

/// Bipartition of the bosonic modes of a covariance matrix. Mode 0 is the
/// cavity, mode `m >= 1` the `m`-th retained phonon. Modes in neither list
/// are traced out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

impl Partition {
    /// Cavity against every phonon mode.
    pub fn cavity_vs_phonons(phonons: usize) -> Self {
        Partition { first: vec![0], second: (1..=phonons).collect() }
    }

    fn validate(&self, modes: usize) -> Result<()> {
        let all: Vec<usize> = self.first.iter().chain(&self.second).copied().collect();
        if self.first.is_empty() || self.second.is_empty() {
            return Err(Error::InvalidParameter { name: "partition", reason: "both blocks must be non-empty".into() });
        }
        if let Some(m) = all.iter().find(|&&m| m >= modes) {
            return Err(Error::InvalidParameter { name: "partition", reason: format!("mode {m} out of range") });
        }
        let mut sorted = all.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != all.len() {
            return Err(Error::InvalidParameter { name: "partition", reason: "blocks overlap".into() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Negativity {
    /// `E_N = sum_k max(0, -log2(2 nu_k))` over the partially transposed spectrum.
    pub value: f64,
    /// Symplectic eigenvalues of the partially transposed covariance, ascending.
    pub symplectic: Vec<f64>,
}

/// Symplectic eigenvalues (ascending, one per mode) of a positive definite
/// covariance, from the singular values of `S^{1/2} Omega S^{1/2}`.
pub fn symplectic_eigenvalues(sigma: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = sigma.nrows();
    if !n.is_multiple_of(2) || sigma.ncols() != n {
        return Err(Error::Dimension(format!("covariance of shape {:?} is not 2n x 2n", sigma.shape())));
    }
    let eig = SymmetricEigen::new(0.5 * (sigma + sigma.transpose()));
    if let Some(&low) = eig.eigenvalues.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::Unphysical { min_eigenvalue: low });
    }
    let root =
        &eig.eigenvectors * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt)) * eig.eigenvectors.transpose();
    let om = super::langevin::symplectic_form(n / 2);
    let k = &root * om * &root;
    let mut sv: Vec<f64> = k.singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    // singular values come in equal pairs
    Ok(sv.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect())
}

/// Logarithmic negativity between the two blocks of `partition`.
pub fn log_negativity(sigma: &DMatrix<f64>, partition: &Partition) -> Result<Negativity> {
    let modes = sigma.nrows() / 2;
    partition.validate(modes)?;
    let margin = uncertainty_margin(sigma);
    if margin < -PHYSICALITY_TOL {
        return Err(Error::Unphysical { min_eigenvalue: margin });
    }
    let keep: Vec<usize> = partition.first.iter().chain(&partition.second).copied().collect();
    let rows: Vec<usize> = keep.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
    let mut reduced = sigma.select_rows(rows.iter()).select_columns(rows.iter());
    // partial transpose: p -> -p on the first block
    for b in 0..partition.first.len() {
        let p = 2 * b + 1;
        for j in 0..reduced.ncols() {
            if j != p {
                reduced[(p, j)] = -reduced[(p, j)];
                reduced[(j, p)] = -reduced[(j, p)];
            }
        }
    }
    let symplectic = symplectic_eigenvalues(&reduced)?;
    let value = symplectic.iter().map(|&v| (-(2.0 * v).log2()).max(0.0)).sum();
    Ok(Negativity { value, symplectic })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Covariance of a two-mode squeezed vacuum with squeezing `r`.
    fn two_mode_squeezed(r: f64) -> DMatrix<f64> {
        let (c, s) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
        DMatrix::from_row_slice(4, 4, &[c, 0.0, s, 0.0, 0.0, c, 0.0, -s, s, 0.0, c, 0.0, 0.0, -s, 0.0, c])
    }

    fn local_rotation(phi: f64, modes: usize, which: usize) -> DMatrix<f64> {
        let mut r = DMatrix::identity(2 * modes, 2 * modes);
        let (c, s) = (phi.cos(), phi.sin());
        let i = 2 * which;
        r[(i, i)] = c;
        r[(i, i + 1)] = s;
        r[(i + 1, i)] = -s;
        r[(i + 1, i + 1)] = c;
        r
    }

    #[test]
    fn two_mode_squeezing_oracle() {
        for r in [0.05, 0.3, 1.0] {
            let e = log_negativity(&two_mode_squeezed(r), &Partition::cavity_vs_phonons(1)).unwrap();
            assert!((e.value - 2.0 * r / std::f64::consts::LN_2).abs() < 1e-10, "{r}: {}", e.value);
            assert!((e.symplectic[0] - 0.5 * (-2.0 * r).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn product_vacuum_has_none() {
        let s = DMatrix::identity(6, 6) * 0.5;
        let e = log_negativity(&s, &Partition::cavity_vs_phonons(2)).unwrap();
        assert_eq!(e.value, 0.0);
        for v in e.symplectic {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn thermal_state_eigenvalues() {
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 0.5, 1.7, 1.7]));
        let nu = symplectic_eigenvalues(&s).unwrap();
        assert!((nu[0] - 0.5).abs() < 1e-14 && (nu[1] - 1.7).abs() < 1e-14, "{nu:?}");
    }

    #[test]
    fn invariant_under_local_rotations() {
        let s = two_mode_squeezed(0.4);
        let base = log_negativity(&s, &Partition::cavity_vs_phonons(1)).unwrap().value;
        let r = local_rotation(0.7, 2, 0) * local_rotation(-1.3, 2, 1);
        let rotated = &r * &s * r.transpose();
        let e = log_negativity(&rotated, &Partition::cavity_vs_phonons(1)).unwrap().value;
        assert!((e - base).abs() < 1e-10);
    }

    #[test]
    fn rejects_unphysical_and_bad_partitions() {
        let s = DMatrix::identity(4, 4) * 0.3;
        assert!(matches!(log_negativity(&s, &Partition::cavity_vs_phonons(1)), Err(Error::Unphysical { .. })));
        let ok = DMatrix::identity(4, 4) * 0.5;
        let p = Partition { first: vec![0], second: vec![0] };
        assert!(log_negativity(&ok, &p).is_err());
        let p = Partition { first: vec![0], second: vec![3] };
        assert!(log_negativity(&ok, &p).is_err());
    }
}
