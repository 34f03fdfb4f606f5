//! Jacobi-preconditioned conjugate gradients.

use serde::{Deserialize, Serialize};

use super::sparse::SparseMatrix;
use crate::error::{AfemError, Result};
use crate::scalar::Real;

/// Settings for [`solve_cg`]. `max_iter = None` means `10 · dim`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub tol_rel: f64,
    pub max_iter: Option<usize>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol_rel: 1e-10,
            max_iter: None,
        }
    }
}

/// Result of a CG run, converged or not.
#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution<T> {
    /// The iterate with the smallest residual seen.
    pub x: Vec<T>,
    pub iterations: usize,
    pub relative_residual: T,
    pub converged: bool,
}

/// Runs preconditioned CG from `x0` (zero when `None`) and always returns the best iterate.
pub fn cg<T: Real>(a: &SparseMatrix<T>, b: &[T], tol_rel: T, max_iter: usize, x0: Option<&[T]>) -> CgSolution<T> {
    let n = a.dim();
    assert_eq!(b.len(), n, "right-hand side length mismatch");
    let norm = |v: &[T]| v.iter().fold(T::zero(), |s, &x| s + x * x).sqrt();
    let dot = |u: &[T], v: &[T]| u.iter().zip(v).fold(T::zero(), |s, (&x, &y)| s + x * y);

    let b_norm = norm(b);
    let mut x: Vec<T> = x0.map(<[T]>::to_vec).unwrap_or_else(|| vec![T::zero(); n]);
    if b_norm == T::zero() {
        return CgSolution {
            x: vec![T::zero(); n],
            iterations: 0,
            relative_residual: T::zero(),
            converged: true,
        };
    }
    let inv_diag: Vec<T> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > T::zero() { T::one() / d } else { T::one() })
        .collect();

    let mut r = a.mul_vec(&x);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut rel = norm(&r) / b_norm;
    let mut best = (rel, x.clone());
    if rel <= tol_rel {
        return CgSolution {
            x,
            iterations: 0,
            relative_residual: rel,
            converged: true,
        };
    }
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &d)| ri * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];

    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] = x[i] + alpha * p[i];
            r[i] = r[i] - alpha * ap[i];
        }
        rel = norm(&r) / b_norm;
        if rel < best.0 {
            best = (rel, x.clone());
        }
        if rel <= tol_rel {
            return CgSolution {
                x,
                iterations: it,
                relative_residual: rel,
                converged: true,
            };
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        if it == max_iter {
            return CgSolution {
                x: best.1,
                iterations: it,
                relative_residual: best.0,
                converged: false,
            };
        }
    }
    CgSolution {
        x: best.1,
        iterations: max_iter,
        relative_residual: best.0,
        converged: false,
    }
}

/// Solves `A x = b` to relative residual `tol_rel`; fails with
/// [`AfemError::MaxIterExceeded`] if the iteration budget runs out.
pub fn solve_cg<T: Real>(a: &SparseMatrix<T>, b: &[T], tol_rel: T, max_iter: usize) -> Result<Vec<T>> {
    let sol = cg(a, b, tol_rel, max_iter, None);
    if sol.converged {
        Ok(sol.x)
    } else {
        Err(AfemError::MaxIterExceeded {
            iterations: sol.iterations,
            relative_residual: sol.relative_residual.as_f64(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_system() {
        let a = SparseMatrix::from_triplets(2, vec![(0, 0, 2.0), (1, 1, 1.0)]);
        let x: Vec<f64> = solve_cg(&a, &[2.0, 1.0], 1e-12, 10).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_rhs_takes_no_iterations() {
        let a = SparseMatrix::from_triplets(2, vec![(0, 0, 2.0), (1, 1, 1.0)]);
        let s = cg(&a, &[0.0, 0.0], 1e-10, 10, None);
        assert_eq!(s.iterations, 0);
        assert_eq!(s.x, vec![0.0, 0.0]);
    }

    #[test]
    fn budget_exhaustion_reports_best_iterate() {
        // 1D Laplacian needs n iterations; give it two.
        let n = 20;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, t);
        let b = vec![1.0; n];
        let s = cg(&a, &b, 1e-12, 2, None);
        assert!(!s.converged);
        assert!(s.relative_residual <= 1.0);
        assert!(matches!(
            solve_cg(&a, &b, 1e-12, 2),
            Err(AfemError::MaxIterExceeded { iterations: 2, .. })
        ));
        assert!(solve_cg(&a, &b, 1e-12, 10 * n).is_ok());
    }
}
