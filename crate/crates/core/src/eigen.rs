//! Real symmetric eigendecompositions used by the spectral propagator.
//!
//! Chains go through an implicit QL sweep with Wilkinson-type shifts on the
//! tridiagonal form directly. Dense product-basis operators use nalgebra's
//! symmetric eigensolver.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    /// `vectors[k]` is the eigenvector of `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

impl Eigensystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Expansion coefficients `<v_k|psi>`.
    pub fn project(&self, psi: &[C64]) -> Vec<C64> {
        self.vectors.iter().map(|v| v.iter().zip(psi).map(|(&a, &b)| b * a).sum()).collect()
    }

    /// `sum_k exp(-i E_k t) c_k v_k` for precomputed coefficients.
    pub fn evolve_coefficients(&self, coeffs: &[C64], t: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        for ((&e, v), &c) in self.values.iter().zip(&self.vectors).zip(coeffs) {
            let w = c * C64::from_polar(1.0, -e * t);
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, &x) in out.iter_mut().zip(v) {
                *o += w * x;
            }
        }
        out
    }

    pub fn evolve(&self, psi: &[C64], t: f64) -> Vec<C64> {
        self.evolve_coefficients(&self.project(psi), t)
    }

    fn sorted(values: Vec<f64>, vectors: Vec<Vec<f64>>) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        Eigensystem {
            values: order.iter().map(|&i| values[i]).collect(),
            vectors: order.iter().map(|&i| vectors[i].clone()).collect(),
        }
    }
}

/// Full eigendecomposition of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal (`offdiag.len() == diag.len() - 1`).
pub fn tridiagonal_eigen(diag: &[f64], offdiag: &[f64]) -> Result<Eigensystem> {
    let n = diag.len();
    if n == 0 {
        return Ok(Eigensystem { values: vec![], vectors: vec![] });
    }
    if offdiag.len() + 1 != n {
        return Err(Error::DimensionMismatch { expected: n - 1, got: offdiag.len() });
    }
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    // q[i] holds column i of the accumulated rotation.
    let mut q: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut col = vec![0.0; n];
            col[i] = 1.0;
            col
        })
        .collect();

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::Eigensolver { index: l, iterations: iter - 1 });
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                let (lo, hi) = q.split_at_mut(i + 1);
                let (qi, qi1) = (&mut lo[i], &mut hi[0]);
                for (x, y) in qi.iter_mut().zip(qi1.iter_mut()) {
                    let f = *y;
                    *y = s * *x + c * f;
                    *x = c * *x - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(Eigensystem::sorted(d, q))
}

/// Dense symmetric eigendecomposition (nalgebra).
pub fn dense_symmetric_eigen(m: &DMatrix<f64>) -> Result<Eigensystem> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
    }
    let n = m.nrows();
    let eig = m.clone().try_symmetric_eigen(f64::EPSILON, 0).ok_or(Error::Eigensolver { index: 0, iterations: 0 })?;
    let values = eig.eigenvalues.iter().copied().collect();
    let vectors = (0..n).map(|k| eig.eigenvectors.column(k).iter().copied().collect()).collect();
    Ok(Eigensystem::sorted(values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(diag: &[f64], off: &[f64]) -> DMatrix<f64> {
        let n = diag.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        })
    }

    fn check_decomposition(diag: &[f64], off: &[f64], tol: f64) {
        let es = tridiagonal_eigen(diag, off).unwrap();
        let m = dense(diag, off);
        for (k, v) in es.vectors.iter().enumerate() {
            let v = nalgebra::DVector::from_column_slice(v);
            let resid = &m * &v - &v * es.values[k];
            assert!(resid.amax() < tol, "residual {} for k = {k}", resid.amax());
            assert!((v.norm() - 1.0).abs() < tol);
        }
        for i in 0..es.dim() {
            for j in 0..i {
                let dot: f64 = es.vectors[i].iter().zip(&es.vectors[j]).map(|(a, b)| a * b).sum();
                assert!(dot.abs() < tol);
            }
        }
        assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn two_by_two() {
        let es = tridiagonal_eigen(&[0.0, 0.0], &[1.0]).unwrap();
        assert!((es.values[0] + 1.0).abs() < 1e-15);
        assert!((es.values[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn already_diagonal() {
        let es = tridiagonal_eigen(&[3.0, 1.0, 2.0], &[0.0, 0.0]).unwrap();
        assert_eq!(es.values, vec![1.0, 2.0, 3.0]);
        assert_eq!(es.vectors[0], vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn single_site() {
        let es = tridiagonal_eigen(&[2.5], &[]).unwrap();
        assert_eq!(es.values, vec![2.5]);
    }

    #[test]
    fn wrong_offdiag_length() {
        assert!(tridiagonal_eigen(&[1.0, 2.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn matches_dense_solver_on_chain_like_matrix() {
        let n = 80;
        let diag: Vec<f64> = (0..n).map(|i| i as f64 + if i % 2 == 0 { 0.15 } else { -0.15 }).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| 2.0 * ((i + 1) as f64).sqrt()).collect();
        check_decomposition(&diag, &off, 1e-10);
        let ours = tridiagonal_eigen(&diag, &off).unwrap();
        let theirs = dense_symmetric_eigen(&dense(&diag, &off)).unwrap();
        for (a, b) in ours.values.iter().zip(&theirs.values) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn free_particle_chain() {
        // Uniform hopping: E_k = 2 cos(k pi / (n + 1)).
        let n = 50;
        let es = tridiagonal_eigen(&vec![0.0; n], &vec![1.0; n - 1]).unwrap();
        let mut exact: Vec<f64> =
            (1..=n).map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos()).collect();
        exact.sort_by(f64::total_cmp);
        for (a, b) in es.values.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-13);
        }
        check_decomposition(&vec![0.0; n], &vec![1.0; n - 1], 1e-12);
    }

    #[test]
    fn evolution_is_identity_at_zero_time() {
        let es = tridiagonal_eigen(&[0.0, 1.0, 2.0], &[2.0, 2.0 * 2f64.sqrt()]).unwrap();
        let psi = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), C64::new(0.0, 0.0)];
        let out = es.evolve(&psi, 0.0);
        for (a, b) in out.iter().zip(&psi) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
