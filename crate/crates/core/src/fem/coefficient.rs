use std::fmt;
use std::sync::Arc;

use super::quadrature::QuadratureRule;
use crate::error::{AfemError, Result};
use crate::mesh::Mesh;
use crate::scalar::{scaled_identity, sym_eigenvalues, Mat2, Point, Real};

/// A scalar field on the plane.
pub type ScalarFn<T> = Arc<dyn Fn(Point<T>) -> T + Send + Sync>;
/// A vector field on the plane.
pub type VectorFn<T> = Arc<dyn Fn(Point<T>) -> Point<T> + Send + Sync>;

/// The diffusion coefficient `A` of `-∇·(A∇u) = f`.
#[derive(Clone)]
pub enum CoefficientField<T> {
    Identity,
    /// One SPD matrix per subdomain label.
    PiecewiseConstant(Vec<Mat2<T>>),
    /// `A = a(x) I`, optionally with the analytic gradient of `a`.
    Scalar {
        a: ScalarFn<T>,
        grad: Option<VectorFn<T>>,
    },
}

impl<T> fmt::Debug for CoefficientField<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientField::Identity => write!(f, "Identity"),
            CoefficientField::PiecewiseConstant(m) => f.debug_tuple("PiecewiseConstant").field(m).finish(),
            CoefficientField::Scalar { grad, .. } => write!(f, "Scalar {{ analytic_gradient: {} }}", grad.is_some()),
        }
    }
}

impl<T: Real> CoefficientField<T> {
    /// Piecewise scalar coefficient `a_j I` on subdomain `j`.
    pub fn piecewise_scalar(values: &[T]) -> Self {
        CoefficientField::PiecewiseConstant(values.iter().map(|&a| scaled_identity(a)).collect())
    }

    /// True when `A` is constant on every element.
    pub fn is_elementwise_constant(&self) -> bool {
        !matches!(self, CoefficientField::Scalar { .. })
    }

    /// Checks SPD-ness of every piecewise matrix and label coverage of the mesh.
    pub fn validate(&self, mesh: &Mesh<T>) -> Result<()> {
        if let CoefficientField::PiecewiseConstant(mats) = self {
            for (j, m) in mats.iter().enumerate() {
                let sym = (m[0][1] - m[1][0]).abs() <= T::lit(1e-12) * (m[0][1].abs() + m[1][0].abs() + T::one());
                if !sym || !(sym_eigenvalues(m).0 > T::zero()) {
                    return Err(AfemError::NonSpdCoefficient { subdomain: j });
                }
            }
            if let Some(&j) = mesh.subdomains().iter().find(|&&j| j >= mats.len()) {
                return Err(AfemError::MissingSubdomainCoefficient { subdomain: j });
            }
        }
        Ok(())
    }

    /// `A` at a point inside an element carrying subdomain label `subdomain`.
    pub fn at(&self, subdomain: usize, p: Point<T>) -> Mat2<T> {
        match self {
            CoefficientField::Identity => scaled_identity(T::one()),
            CoefficientField::PiecewiseConstant(m) => m[subdomain],
            CoefficientField::Scalar { a, .. } => scaled_identity(a(p)),
        }
    }

    /// The mean of `A` over an element (exact for elementwise-constant fields).
    pub fn element_mean(&self, mesh: &Mesh<T>, element: usize, quad: &QuadratureRule<T>) -> Mat2<T> {
        match self {
            CoefficientField::Scalar { a, .. } => {
                let tri = mesh.coords(element);
                scaled_identity(quad.integrate(&tri, |p| a(p)) / mesh.area(element))
            }
            _ => self.at(mesh.subdomain(element), [T::zero(), T::zero()]),
        }
    }

    /// Scalar weight standing in for `A^{-1}` on residual terms: `1/λ_min(A)`.
    pub fn inverse_weight(&self, subdomain: usize, p: Point<T>) -> T {
        T::one() / sym_eigenvalues(&self.at(subdomain, p)).0
    }

    /// Returns a copy with `A` multiplied by `s > 0`.
    pub fn scaled(&self, s: T) -> Self {
        match self {
            CoefficientField::Identity => CoefficientField::PiecewiseConstant(vec![scaled_identity(s)]),
            CoefficientField::PiecewiseConstant(m) => CoefficientField::PiecewiseConstant(
                m.iter()
                    .map(|a| [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]])
                    .collect(),
            ),
            CoefficientField::Scalar { a, grad } => {
                let a = a.clone();
                let grad = grad.clone();
                CoefficientField::Scalar {
                    a: Arc::new(move |p| a(p) * s),
                    grad: grad.map(|g| Arc::new(move |p| g(p).map(|x| x * s)) as VectorFn<T>),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_labels() -> Mesh<f64> {
        Mesh::build(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
            vec![],
            Some(vec![0, 1]),
        )
        .unwrap()
    }

    #[test]
    fn spd_check() {
        let m = two_labels();
        let good = CoefficientField::PiecewiseConstant(vec![[[2.0, 0.5], [0.5, 1.0]], [[1.0, 0.0], [0.0, 3.0]]]);
        good.validate(&m).unwrap();
        let indefinite = CoefficientField::PiecewiseConstant(vec![[[1.0, 0.0], [0.0, 1.0]], [[1.0, 2.0], [2.0, 1.0]]]);
        assert_eq!(
            indefinite.validate(&m).unwrap_err(),
            AfemError::NonSpdCoefficient { subdomain: 1 }
        );
        let unsym = CoefficientField::PiecewiseConstant(vec![[[1.0, 0.1], [0.0, 1.0]]; 2]);
        assert_eq!(
            unsym.validate(&m).unwrap_err(),
            AfemError::NonSpdCoefficient { subdomain: 0 }
        );
        let short = CoefficientField::piecewise_scalar(&[1.0]);
        assert_eq!(
            short.validate(&m).unwrap_err(),
            AfemError::MissingSubdomainCoefficient { subdomain: 1 }
        );
    }

    #[test]
    fn scalar_field_mean_and_weight() {
        let m = two_labels();
        let c = CoefficientField::Scalar {
            a: Arc::new(|p: [f64; 2]| 1.0 + p[0]),
            grad: None,
        };
        // Mean of 1 + x over the lower triangle (centroid x = 2/3).
        let mean = c.element_mean(&m, 0, &QuadratureRule::default());
        assert!((mean[0][0] - 5.0 / 3.0).abs() < 1e-14);
        assert!((c.inverse_weight(0, [1.0, 0.0]) - 0.5).abs() < 1e-15);
        assert!(!c.is_elementwise_constant());
    }
}
