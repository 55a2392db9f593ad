use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Unitary `U` and upper-triangular `T` with `A = U T U^*`.
pub(crate) struct ComplexSchur {
    pub u: DMatrix<Complex64>,
    pub t: DMatrix<Complex64>,
}

impl ComplexSchur {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let ac: DMatrix<Complex64> = a.map(|v| Complex64::new(v, 0.0));
        let (mut u, mut t) = ac.schur().unpack();
        triangularize(&mut u, &mut t);
        ComplexSchur { u, t }
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }
}

/// Splits any remaining 2x2 diagonal blocks with a unitary rotation.
fn triangularize(u: &mut DMatrix<Complex64>, t: &mut DMatrix<Complex64>) {
    let n = t.nrows();
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    for i in 0..n.saturating_sub(1) {
        let sub = t[(i + 1, i)];
        if sub.norm() <= 1e-15 * scale {
            t[(i + 1, i)] = Complex64::new(0.0, 0.0);
            continue;
        }
        let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], sub, t[(i + 1, i + 1)]);
        let half_tr = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + b * c).sqrt();
        let lambda = half_tr + disc;
        // eigenvector (lambda - d, c) of the block, normalized
        let (v0, v1) = (lambda - d, c);
        let nv = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
        let (cs, sn) = (v0 / nv, v1 / nv);
        // G = [[cs, -conj(sn)], [sn, conj(cs)]], first column is the eigenvector
        let g = |r: usize, col: usize| -> Complex64 {
            match (r, col) {
                (0, 0) => cs,
                (0, 1) => -sn.conj(),
                (1, 0) => sn,
                _ => cs.conj(),
            }
        };
        // T <- G^* T G on rows/cols i, i+1; U <- U G
        for col in 0..n {
            let (x, y) = (t[(i, col)], t[(i + 1, col)]);
            t[(i, col)] = g(0, 0).conj() * x + g(1, 0).conj() * y;
            t[(i + 1, col)] = g(0, 1).conj() * x + g(1, 1).conj() * y;
        }
        for mat in [&mut *t, &mut *u] {
            for r in 0..n {
                let (x, y) = (mat[(r, i)], mat[(r, i + 1)]);
                mat[(r, i)] = x * g(0, 0) + y * g(1, 0);
                mat[(r, i + 1)] = x * g(0, 1) + y * g(1, 1);
            }
        }
        t[(i + 1, i)] = Complex64::new(0.0, 0.0);
    }
}

/// Largest real part of the eigenvalues of `a`.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> f64 {
    ComplexSchur::new(a).eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Solves `A X + X A^T + Q = 0` for a Hurwitz `A` by complex Schur
/// decomposition and triangular back-substitution.
pub fn solve_lyapunov(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n || q.shape() != (n, n) {
        return Err(Error::Dimension(format!("drift {:?} and noise {:?} are incompatible", a.shape(), q.shape())));
    }
    let schur = ComplexSchur::new(a);
    let max_real = schur.eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    if !(max_real < 0.0) {
        return Err(Error::NoSteadyState { max_real });
    }
    let (u, t) = (&schur.u, &schur.t);
    let qc: DMatrix<Complex64> = q.map(|v| Complex64::new(v, 0.0));
    let c = u.adjoint() * qc * u;
    // T Y + Y T^* + C = 0, solved from the bottom-right corner
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for i in (0..n).rev() {
        for j in (0..n).rev() {
            let mut rhs = -c[(i, j)];
            for k in (i + 1)..n {
                rhs -= t[(i, k)] * y[(k, j)];
            }
            for k in (j + 1)..n {
                rhs -= y[(i, k)] * t[(j, k)].conj();
            }
            y[(i, j)] = rhs / (t[(i, i)] + t[(j, j)].conj());
        }
    }
    let x = (u * y * u.adjoint()).map(|z| z.re);
    Ok(0.5 * (&x + x.transpose()))
}

/// Max-abs entry of `A X + X A^T + Q`.
pub fn lyapunov_residual(a: &DMatrix<f64>, x: &DMatrix<f64>, q: &DMatrix<f64>) -> f64 {
    (a * x + x * a.transpose() + q).amax()
}
