use std::sync::Arc;

use crate::error::{AfemError, Result};
use crate::mesh::Mesh;
use crate::scalar::{Point, Real};

/// A continuous piecewise-linear scalar field given by its nodal values.
#[derive(Debug, Clone)]
pub struct FEFunction<T> {
    mesh: Arc<Mesh<T>>,
    values: Vec<T>,
}

impl<T: Real> FEFunction<T> {
    pub fn new(mesh: Arc<Mesh<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != mesh.n_vertices() {
            return Err(AfemError::MeshMismatch);
        }
        Ok(FEFunction { mesh, values })
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: Arc<Mesh<T>>, f: impl Fn(Point<T>) -> T) -> Self {
        let values = mesh.vertices().iter().map(|&p| f(p)).collect();
        FEFunction { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// The constant gradient on an element.
    pub fn element_gradient(&self, element: usize) -> Point<T> {
        let grads = self.mesh.basis_gradients(element);
        let el = self.mesh.elements()[element];
        let mut g = [T::zero(); 2];
        for (i, &v) in el.iter().enumerate() {
            g[0] = g[0] + self.values[v] * grads[i][0];
            g[1] = g[1] + self.values[v] * grads[i][1];
        }
        g
    }

    pub fn gradients(&self) -> Vec<Point<T>> {
        (0..self.mesh.n_elements()).map(|k| self.element_gradient(k)).collect()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Multiplies all nodal values by `s`.
    pub fn scaled(&self, s: T) -> Self {
        FEFunction {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|&v| v * s).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> Arc<Mesh<f64>> {
        Arc::new(Mesh::build(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], vec![], None).unwrap())
    }

    #[test]
    fn gradient_of_linear_and_constant() {
        let u = FEFunction::interpolate(reference(), |p| p[0]);
        assert_eq!(u.element_gradient(0), [1.0, 0.0]);
        let c = FEFunction::interpolate(reference(), |_| 3.5);
        let g = c.element_gradient(0);
        assert!(g[0].abs() < 1e-15 && g[1].abs() < 1e-15);
    }

    #[test]
    fn gradient_of_interpolated_square() {
        // Nodal values of x² are 0, 1, 0, so the interpolant is x.
        let u = FEFunction::interpolate(reference(), |p| p[0] * p[0]);
        assert_eq!(u.element_gradient(0), [1.0, 0.0]);
    }

    #[test]
    fn length_checked() {
        assert_eq!(
            FEFunction::new(reference(), vec![0.0; 2]).unwrap_err(),
            AfemError::MeshMismatch
        );
    }
}
