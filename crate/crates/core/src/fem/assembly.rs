//! Stiffness and load assembly for `-∇·(A∇u) = f` and Dirichlet elimination.

use std::sync::Arc;

use super::coefficient::CoefficientField;
use super::function::FEFunction;
use super::quadrature::{triangle_area, QuadratureRule};
use super::solver::{solve_cg, SolverSettings};
use super::sparse::SparseMatrix;
use crate::error::{AfemError, Result};
use crate::mesh::{basis_gradients, Mesh};
use crate::scalar::{dot, mat_vec, Mat2, Point, Real};

/// `K[i][j] = |K| ∇φ_iᵀ A ∇φ_j` for constant `A` on the triangle.
pub fn local_stiffness<T: Real>(tri: &[Point<T>; 3], a: &Mat2<T>) -> Result<[[T; 3]; 3]> {
    let area = triangle_area(tri);
    let scale = tri
        .iter()
        .flat_map(|p| p.iter())
        .fold(T::zero(), |m, x| m.max(x.abs()))
        .max(T::min_positive_value());
    if !(area > T::epsilon() * scale * scale) {
        return Err(AfemError::DegenerateElement { element: 0 });
    }
    // Signed-area basis gradients are valid for either orientation.
    let g = basis_gradients(tri);
    let mut k = [[T::zero(); 3]; 3];
    for i in 0..3 {
        let ag = mat_vec(a, g[i]);
        for j in 0..3 {
            k[j][i] = area * dot(g[j], ag);
        }
    }
    Ok(k)
}

/// Global stiffness matrix (all vertices, no constraints) and load vector `(f, φ_i)`.
pub fn assemble_system<T: Real>(
    mesh: &Mesh<T>,
    coefficient: &CoefficientField<T>,
    f: &dyn Fn(Point<T>) -> T,
    quad: &QuadratureRule<T>,
) -> Result<(SparseMatrix<T>, Vec<T>)> {
    coefficient.validate(mesh)?;
    let mut triplets = Vec::with_capacity(9 * mesh.n_elements());
    let mut load = vec![T::zero(); mesh.n_vertices()];
    for (k, el) in mesh.elements().iter().enumerate() {
        let tri = mesh.coords(k);
        let a = coefficient.element_mean(mesh, k, quad);
        let local = local_stiffness(&tri, &a).map_err(|_| AfemError::DegenerateElement { element: k })?;
        for i in 0..3 {
            for j in 0..3 {
                triplets.push((el[i], el[j], local[i][j]));
            }
        }
        let area = mesh.area(k);
        for (b, &w) in quad.barycentric_points().iter().zip(quad.weights()) {
            let p = super::quadrature::from_barycentric(&tri, b);
            let fw = f(p) * w * area;
            for i in 0..3 {
                load[el[i]] = load[el[i]] + fw * b[i];
            }
        }
    }
    Ok((SparseMatrix::from_triplets(mesh.n_vertices(), triplets), load))
}

/// The linear system restricted to free (non-Dirichlet) vertices.
#[derive(Debug, Clone)]
pub struct ConstrainedSystem<T> {
    pub matrix: SparseMatrix<T>,
    pub rhs: Vec<T>,
    /// Free vertex indices, ascending; row `i` of `matrix` belongs to `free[i]`.
    pub free: Vec<usize>,
    /// Full nodal vector holding `g` on the boundary and zero elsewhere.
    pub lift: Vec<T>,
}

impl<T: Real> ConstrainedSystem<T> {
    pub fn n_dofs(&self) -> usize {
        self.free.len()
    }

    /// Scatters free values into a full nodal vector with the boundary lift.
    pub fn expand(&self, x: &[T]) -> Vec<T> {
        let mut full = self.lift.clone();
        for (&v, &xi) in self.free.iter().zip(x) {
            full[v] = xi;
        }
        full
    }

    /// Solves with Jacobi-preconditioned CG.
    pub fn solve(&self, mesh: Arc<Mesh<T>>, settings: &SolverSettings) -> Result<FEFunction<T>> {
        let max_iter = settings.max_iter.unwrap_or(10 * self.n_dofs().max(1));
        let x = if self.n_dofs() == 0 {
            Vec::new()
        } else {
            solve_cg(&self.matrix, &self.rhs, T::lit(settings.tol_rel), max_iter)?
        };
        FEFunction::new(mesh, self.expand(&x))
    }
}

/// Imposes `u = g` at boundary vertices by symmetric elimination.
pub fn apply_dirichlet<T: Real>(
    matrix: &SparseMatrix<T>,
    load: &[T],
    mesh: &Mesh<T>,
    g: &dyn Fn(Point<T>) -> T,
) -> ConstrainedSystem<T> {
    let on_boundary = mesh.boundary_vertices();
    let lift: Vec<T> = mesh
        .vertices()
        .iter()
        .zip(&on_boundary)
        .map(|(&p, &b)| if b { g(p) } else { T::zero() })
        .collect();
    let free: Vec<usize> = (0..mesh.n_vertices()).filter(|&v| !on_boundary[v]).collect();
    let correction = matrix.mul_vec(&lift);
    let rhs = free.iter().map(|&v| load[v] - correction[v]).collect();
    ConstrainedSystem {
        matrix: matrix.submatrix(&free),
        rhs,
        free,
        lift,
    }
}

/// Assembles, constrains and solves in one go.
pub fn solve_dirichlet<T: Real>(
    mesh: Arc<Mesh<T>>,
    coefficient: &CoefficientField<T>,
    f: &dyn Fn(Point<T>) -> T,
    g: &dyn Fn(Point<T>) -> T,
    quad: &QuadratureRule<T>,
    settings: &SolverSettings,
) -> Result<FEFunction<T>> {
    let (k, b) = assemble_system(&mesh, coefficient, f, quad)?;
    let sys = apply_dirichlet(&k, &b, &mesh, g);
    sys.solve(mesh, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::scaled_identity;

    const REF: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

    #[test]
    fn reference_stiffness() {
        let k = local_stiffness(&REF, &scaled_identity(1.0)).unwrap();
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expect[i][j]).abs() < 1e-15);
            }
        }
        let k2 = local_stiffness(&REF, &scaled_identity(2.0)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(k2[i][j], 2.0 * k[i][j]);
            }
        }
    }

    #[test]
    fn clockwise_input_gives_same_matrix() {
        let cw = [REF[0], REF[2], REF[1]];
        let a = [[2.0, 0.3], [0.3, 1.0]];
        let k = local_stiffness(&REF, &a).unwrap();
        let kc = local_stiffness(&cw, &a).unwrap();
        let perm = [0, 2, 1];
        for i in 0..3 {
            for j in 0..3 {
                assert!((kc[i][j] - k[perm[i]][perm[j]]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn degenerate_rejected() {
        let flat = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(
            local_stiffness(&flat, &scaled_identity(1.0)),
            Err(AfemError::DegenerateElement { .. })
        ));
    }

    #[test]
    fn load_of_x_on_reference_triangle() {
        // Symbolic: ∫ x φ_0 = ∫ x(1-x-y) = 1/24, ∫ x φ_1 = ∫ x² = 1/12, ∫ x φ_2 = ∫ x y = 1/24.
        let m = Mesh::build(REF.to_vec(), vec![[0, 1, 2]], vec![], None).unwrap();
        let (_, b) = assemble_system(
            &m,
            &CoefficientField::Identity,
            &|p| p[0],
            &QuadratureRule::seven_point(),
        )
        .unwrap();
        let expect = [1.0 / 24.0, 1.0 / 12.0, 1.0 / 24.0];
        for i in 0..3 {
            assert!((b[i] - expect[i]).abs() < 1e-15, "{b:?}");
        }
    }

    #[test]
    fn unit_load_partition_of_unity() {
        let m = Mesh::build(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
            vec![],
            None,
        )
        .unwrap();
        let q = QuadratureRule::default();
        let (k, b) = assemble_system(&m, &CoefficientField::Identity, &|_| 1.0, &q).unwrap();
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let (_, b0) = assemble_system(&m, &CoefficientField::Identity, &|_| 0.0, &q).unwrap();
        assert!(b0.iter().all(|&x| x == 0.0));
        assert!(k.is_symmetric(1e-12));
        for i in 0..4 {
            let (_, vals) = k.row(i);
            assert!(vals.iter().sum::<f64>().abs() < 1e-14);
        }
    }
}
