//! Weighted-averaging gradient recovery.
//!
//! The piecewise-constant gradient of a P1 function is averaged over vertex
//! patches and interpolated back as a piecewise-linear vector field. In
//! per-subdomain mode each vertex gets one value per adjacent subdomain, so the
//! recovered field may jump across coefficient interfaces.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{AfemError, Result};
use crate::fem::{linear_field_error, CoefficientField, ErrorIntegrator, FEFunction, FieldError, VectorFn};
use crate::mesh::Mesh;
use crate::scalar::{Point, Real};

/// How the element gradients of a vertex patch are weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    /// `|K| / |ω_z|`.
    #[default]
    Area,
    /// `1 / J_z`.
    Arithmetic,
}

/// Whether averaging may cross subdomain interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecoveryMode {
    #[default]
    Global,
    #[serde(rename = "subdomain", alias = "per_subdomain")]
    PerSubdomain,
}

impl FromStr for Weighting {
    type Err = AfemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "area" => Ok(Weighting::Area),
            "arithmetic" => Ok(Weighting::Arithmetic),
            _ => Err(AfemError::InvalidConfig(format!("unknown weighting `{s}`"))),
        }
    }
}

impl FromStr for RecoveryMode {
    type Err = AfemError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(RecoveryMode::Global),
            "subdomain" | "per_subdomain" => Ok(RecoveryMode::PerSubdomain),
            _ => Err(AfemError::InvalidConfig(format!("unknown recovery mode `{s}`"))),
        }
    }
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Weighting::Area => "area",
            Weighting::Arithmetic => "arithmetic",
        })
    }
}

impl fmt::Display for RecoveryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RecoveryMode::Global => "global",
            RecoveryMode::PerSubdomain => "subdomain",
        })
    }
}

/// A recovered gradient, stored as three corner vectors per element.
#[derive(Debug, Clone)]
pub struct RecoveredGradient<T> {
    mesh: Arc<Mesh<T>>,
    corners: Vec<[Point<T>; 3]>,
    mode: RecoveryMode,
}

impl<T: Real> RecoveredGradient<T> {
    /// Wraps explicit corner values (mostly useful for tests).
    pub fn from_corners(mesh: Arc<Mesh<T>>, corners: Vec<[Point<T>; 3]>, mode: RecoveryMode) -> Result<Self> {
        if corners.len() != mesh.n_elements() {
            return Err(AfemError::MeshMismatch);
        }
        Ok(RecoveredGradient { mesh, corners, mode })
    }

    pub fn mesh(&self) -> &Arc<Mesh<T>> {
        &self.mesh
    }

    pub fn corners(&self) -> &[[Point<T>; 3]] {
        &self.corners
    }

    pub fn mode(&self) -> RecoveryMode {
        self.mode
    }

    /// Value at barycentric coordinates `b` inside `element`.
    pub fn eval(&self, element: usize, b: [T; 3]) -> Point<T> {
        let c = &self.corners[element];
        [
            b[0] * c[0][0] + b[1] * c[1][0] + b[2] * c[2][0],
            b[0] * c[0][1] + b[1] * c[1][1] + b[2] * c[2][1],
        ]
    }

    /// The constant Jacobian `M[a][b] = ∂_b G_a` on an element.
    pub fn jacobian(&self, element: usize) -> [[T; 2]; 2] {
        let grads = self.mesh.basis_gradients(element);
        let mut m = [[T::zero(); 2]; 2];
        for (corner, g) in self.corners[element].iter().zip(&grads) {
            for a in 0..2 {
                for b in 0..2 {
                    m[a][b] = m[a][b] + corner[a] * g[b];
                }
            }
        }
        m
    }

    /// `∇·G` on an element (constant for a linear field).
    pub fn divergence(&self, element: usize) -> T {
        let m = self.jacobian(element);
        m[0][0] + m[1][1]
    }

    /// Single-valued nodal field; `None` unless every vertex has one value.
    pub fn nodal_values(&self) -> Option<Vec<Point<T>>> {
        let mut nodal: Vec<Option<Point<T>>> = vec![None; self.mesh.n_vertices()];
        for (el, c) in self.mesh.elements().iter().zip(&self.corners) {
            for i in 0..3 {
                match nodal[el[i]] {
                    None => nodal[el[i]] = Some(c[i]),
                    Some(v) if v == c[i] => {}
                    Some(_) => return None,
                }
            }
        }
        nodal.into_iter().collect()
    }
}

/// Averages `∇u_h` over vertex patches.
///
/// In [`RecoveryMode::PerSubdomain`] only elements with the same subdomain
/// label as the receiving element contribute to its corner values.
pub fn recover<T: Real>(u_h: &FEFunction<T>, weighting: Weighting, mode: RecoveryMode) -> Result<RecoveredGradient<T>> {
    let mesh = u_h.mesh();
    let grads = u_h.gradients();
    let areas: Vec<T> = (0..mesh.n_elements()).map(|k| mesh.area(k)).collect();
    let patches = mesh.vertex_patches();
    let labels = mesh.subdomains();

    let mut corners = vec![[[T::zero(); 2]; 3]; mesh.n_elements()];
    // (label, averaged value) for every vertex; one entry in global mode.
    let mut values: Vec<(usize, Point<T>)> = Vec::new();
    for (z, patch) in patches.iter().enumerate() {
        if patch.is_empty() {
            return Err(AfemError::EmptyPatch { vertex: z });
        }
        values.clear();
        let mut groups: Vec<usize> = match mode {
            RecoveryMode::Global => vec![usize::MAX],
            RecoveryMode::PerSubdomain => patch.iter().map(|&k| labels[k]).collect(),
        };
        groups.sort_unstable();
        groups.dedup();
        for &label in &groups {
            let members = patch
                .iter()
                .copied()
                .filter(|&k| label == usize::MAX || labels[k] == label);
            values.push((label, average(members, &grads, &areas, weighting)));
        }
        for &k in patch {
            let i = mesh.elements()[k]
                .iter()
                .position(|&v| v == z)
                .expect("patch element contains vertex");
            let key = if mode == RecoveryMode::Global {
                usize::MAX
            } else {
                labels[k]
            };
            corners[k][i] = values.iter().find(|(l, _)| *l == key).expect("group for label").1;
        }
    }
    Ok(RecoveredGradient {
        mesh: mesh.clone(),
        corners,
        mode,
    })
}

fn average<T: Real>(
    members: impl Iterator<Item = usize> + Clone,
    grads: &[Point<T>],
    areas: &[T],
    weighting: Weighting,
) -> Point<T> {
    let weight = |k: usize| match weighting {
        Weighting::Area => areas[k],
        Weighting::Arithmetic => T::one(),
    };
    let total = members.clone().fold(T::zero(), |s, k| s + weight(k));
    let mut sum_alpha = T::zero();
    let mut g = [T::zero(); 2];
    for k in members {
        let alpha = weight(k) / total;
        assert!(
            alpha >= T::zero() && alpha <= T::one(),
            "averaging weight outside [0, 1]"
        );
        sum_alpha = sum_alpha + alpha;
        g[0] = g[0] + alpha * grads[k][0];
        g[1] = g[1] + alpha * grads[k][1];
    }
    assert!(
        (sum_alpha - T::one()).abs() <= T::lit(64.0) * T::epsilon(),
        "averaging weights do not sum to one"
    );
    g
}

/// `‖A^{1/2}(∇u - G)‖` with per-element contributions.
pub fn recovered_error<T: Real>(
    g: &RecoveredGradient<T>,
    exact_grad: &VectorFn<T>,
    coefficient: &CoefficientField<T>,
    integrator: &ErrorIntegrator<T>,
) -> FieldError<T> {
    linear_field_error(&g.mesh, &g.corners, exact_grad, coefficient, integrator)
}
