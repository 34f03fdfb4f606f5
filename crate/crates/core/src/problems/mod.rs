//! Benchmark problems: domains, initial meshes, coefficients, data and exact solutions.

mod catalog;
pub mod meshes;
mod validate;

use std::fmt;
use std::sync::Arc;

use crate::error::{AfemError, Result};
use crate::fem::{CoefficientField, ScalarFn, Singularity, VectorFn};
use crate::mesh::Mesh;
use crate::scalar::{Point, Real};

pub use catalog::{
    checkerboard, checkerboard_coarse, circular_layer, four_quadrant_interface, kellogg, kellogg_mu, lshape,
    variable_coefficient_peaks, KelloggParameters, KELLOGG,
};
pub use validate::{validate, Check, ValidationReport};

/// Names accepted by [`by_name`].
pub const PROBLEM_NAMES: [&str; 7] = [
    "lshape",
    "checkerboard",
    "checkerboard-b",
    "interface4",
    "layer",
    "peaks",
    "kellogg",
];

/// A point on an interface between two solution branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceSample<T> {
    pub point: Point<T>,
    /// Unit normal pointing from `regions[0]` into `regions[1]`.
    pub normal: Point<T>,
    pub regions: [usize; 2],
}

/// Piecewise description of an exact solution on a partitioned domain.
///
/// Regions index the solution branches; several regions may share one
/// coefficient label.
#[derive(Clone)]
pub struct SubdomainGeometry<T> {
    pub region_of: Arc<dyn Fn(Point<T>) -> usize + Send + Sync>,
    /// Coefficient (subdomain) label of each region.
    pub region_labels: Vec<usize>,
    pub branch_u: Arc<dyn Fn(usize, Point<T>) -> T + Send + Sync>,
    pub branch_grad: Arc<dyn Fn(usize, Point<T>) -> Point<T> + Send + Sync>,
    pub interfaces: Vec<InterfaceSample<T>>,
}

/// A model problem `-∇·(A∇u) = f` in `Ω`, `u = g` on `∂Ω`.
#[derive(Clone)]
pub struct ProblemSpec<T> {
    pub name: String,
    pub domain: String,
    pub mesh: Mesh<T>,
    pub coefficient: CoefficientField<T>,
    pub f: ScalarFn<T>,
    pub g: ScalarFn<T>,
    pub exact_u: Option<ScalarFn<T>>,
    pub exact_grad: Option<VectorFn<T>>,
    pub subdomains: Option<SubdomainGeometry<T>>,
    /// Point singularity of the exact solution, used for accurate error integration.
    pub singularity: Option<Singularity<T>>,
}

impl<T: Real> fmt::Debug for ProblemSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("elements", &self.mesh.n_elements())
            .field("coefficient", &self.coefficient)
            .field("exact_solution", &self.exact_u.is_some())
            .finish()
    }
}

impl<T: Real> ProblemSpec<T> {
    /// The same problem with `f`, `g` and the exact solution multiplied by `s`.
    pub fn scaled(&self, s: T) -> Self {
        let scale = |h: &ScalarFn<T>| -> ScalarFn<T> {
            let h = h.clone();
            Arc::new(move |p| h(p) * s)
        };
        let scale_vec = |h: &VectorFn<T>| -> VectorFn<T> {
            let h = h.clone();
            Arc::new(move |p| h(p).map(|x| x * s))
        };
        let subdomains = self.subdomains.as_ref().map(|sd| {
            let bu = sd.branch_u.clone();
            let bg = sd.branch_grad.clone();
            SubdomainGeometry {
                branch_u: Arc::new(move |i, p| bu(i, p) * s),
                branch_grad: Arc::new(move |i, p| bg(i, p).map(|x| x * s)),
                ..sd.clone()
            }
        });
        ProblemSpec {
            name: self.name.clone(),
            domain: self.domain.clone(),
            mesh: self.mesh.clone(),
            coefficient: self.coefficient.clone(),
            f: scale(&self.f),
            g: scale(&self.g),
            exact_u: self.exact_u.as_ref().map(scale),
            exact_grad: self.exact_grad.as_ref().map(scale_vec),
            subdomains,
            singularity: self.singularity,
        }
    }
}

/// Looks a benchmark up by its registry name.
pub fn by_name<T: Real>(name: &str) -> Result<ProblemSpec<T>> {
    match name {
        "lshape" => lshape(),
        "checkerboard" => checkerboard(),
        "checkerboard-b" => checkerboard_coarse(),
        "interface4" => four_quadrant_interface(),
        "layer" => circular_layer(),
        "peaks" => variable_coefficient_peaks(),
        "kellogg" => kellogg(),
        _ => Err(AfemError::UnknownProblem(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_resolves_every_name() {
        for name in PROBLEM_NAMES {
            let p: ProblemSpec<f64> = by_name(name).unwrap();
            assert_eq!(p.name, name);
            p.mesh.check_conformity().unwrap();
            p.coefficient.validate(&p.mesh).unwrap();
        }
        assert!(matches!(by_name::<f64>("nope"), Err(AfemError::UnknownProblem(_))));
    }

    #[test]
    fn constructors_are_deterministic() {
        for name in PROBLEM_NAMES {
            let a: ProblemSpec<f64> = by_name(name).unwrap();
            let b: ProblemSpec<f64> = by_name(name).unwrap();
            assert_eq!(a.mesh, b.mesh);
            let p = a.mesh.centroid(0);
            assert_eq!((a.f)(p), (b.f)(p));
        }
    }

    #[test]
    fn scaling_multiplies_data() {
        let p: ProblemSpec<f64> = by_name("peaks").unwrap();
        let s = p.scaled(-3.0);
        let x = [0.3, -0.2];
        assert!(((s.f)(x) + 3.0 * (p.f)(x)).abs() < 1e-12 * (p.f)(x).abs());
        assert!(((s.g)(x) + 3.0 * (p.g)(x)).abs() < 1e-12 * (p.g)(x).abs());
    }

    #[test]
    fn subdomain_alignment_of_initial_meshes() {
        for name in ["interface4", "kellogg"] {
            let p: ProblemSpec<f64> = by_name(name).unwrap();
            let sd = p.subdomains.as_ref().unwrap();
            for k in 0..p.mesh.n_elements() {
                let tri = p.mesh.coords(k);
                let c = p.mesh.centroid(k);
                let region = (sd.region_of)(c);
                assert_eq!(sd.region_labels[region], p.mesh.subdomain(k));
                // Points just inside each corner belong to the centroid's region.
                for v in tri {
                    let q = [v[0] + 1e-6 * (c[0] - v[0]), v[1] + 1e-6 * (c[1] - v[1])];
                    assert_eq!((sd.region_of)(q), region, "{name}: element {k}");
                }
            }
        }
    }
}
