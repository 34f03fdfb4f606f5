//! Conforming triangle meshes with newest-vertex bisection.
//!
//! Elements store their vertices counter-clockwise. Local vertex 0 is the
//! *peak* (newest vertex) and the edge opposite it, `(v1, v2)`, is the
//! refinement edge.

mod io;
mod refine;
mod topology;
mod vtk;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{AfemError, Result};
use crate::scalar::{cross, dot, norm, sub, Point, Real};

pub use io::{parse_mesh_text, write_mesh_text};
pub use refine::{bisect, refine, refine_tracked, Refinement};
pub use topology::{Edge, EdgeTopology};
pub use vtk::VtkExport;

/// Boundary marker given to boundary edges that were not listed explicitly.
pub const DEFAULT_BOUNDARY_MARKER: i32 = 1;

/// An edge on the domain boundary, with a user marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub marker: i32,
}

impl BoundaryEdge {
    pub fn new(a: usize, b: usize, marker: i32) -> Self {
        BoundaryEdge {
            vertices: [a, b],
            marker,
        }
    }

    pub(crate) fn key(&self) -> (usize, usize) {
        edge_key(self.vertices[0], self.vertices[1])
    }
}

#[inline]
pub(crate) fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A conforming triangulation. Immutable once built; refinement returns a new mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh<T> {
    vertices: Vec<Point<T>>,
    elements: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    subdomain: Vec<usize>,
    generation: Vec<u32>,
}

/// A set of element indices selected for refinement, sorted and deduplicated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarkSet {
    elements: Vec<usize>,
}

impl MarkSet {
    pub fn new(mut elements: Vec<usize>) -> Self {
        elements.sort_unstable();
        elements.dedup();
        MarkSet { elements }
    }

    pub fn empty() -> Self {
        MarkSet::default()
    }

    pub fn all<T>(mesh: &Mesh<T>) -> Self {
        MarkSet {
            elements: (0..mesh.n_elements()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, element: usize) -> bool {
        self.elements.binary_search(&element).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.elements.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.elements
    }

    pub(crate) fn insert(&mut self, element: usize) {
        if let Err(pos) = self.elements.binary_search(&element) {
            self.elements.insert(pos, element);
        }
    }

    pub(crate) fn check_against<T>(&self, mesh: &Mesh<T>) -> Result<()> {
        match self.elements.last() {
            Some(&last) if last >= mesh.n_elements() => Err(AfemError::BadIndex {
                index: last,
                limit: mesh.n_elements(),
                context: "mark set",
            }),
            _ => Ok(()),
        }
    }
}

impl FromIterator<usize> for MarkSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        MarkSet::new(iter.into_iter().collect())
    }
}

impl<T> Mesh<T> {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn subdomains(&self) -> &[usize] {
        &self.subdomain
    }

    pub fn subdomain(&self, element: usize) -> usize {
        self.subdomain[element]
    }

    pub fn generations(&self) -> &[u32] {
        &self.generation
    }
}

impl<T: Real> Mesh<T> {
    /// Builds and validates a mesh.
    ///
    /// Negatively oriented triples are reoriented by swapping their last two
    /// vertices, which keeps local vertex 0 (and thus the refinement edge).
    /// Boundary edges that are not listed receive [`DEFAULT_BOUNDARY_MARKER`].
    /// `subdomain_labels` defaults to all zeros.
    pub fn build(
        vertices: Vec<Point<T>>,
        mut elements: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        subdomain_labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        let nv = vertices.len();
        for el in &elements {
            for &v in el {
                if v >= nv {
                    return Err(AfemError::BadIndex {
                        index: v,
                        limit: nv,
                        context: "element vertex",
                    });
                }
            }
        }
        for be in &boundary_edges {
            for &v in &be.vertices {
                if v >= nv {
                    return Err(AfemError::BadIndex {
                        index: v,
                        limit: nv,
                        context: "boundary edge vertex",
                    });
                }
            }
        }
        let subdomain = match subdomain_labels {
            Some(labels) if labels.len() != elements.len() => {
                return Err(AfemError::BadIndex {
                    index: labels.len(),
                    limit: elements.len(),
                    context: "subdomain label count",
                })
            }
            Some(labels) => labels,
            None => vec![0; elements.len()],
        };

        for (i, el) in elements.iter_mut().enumerate() {
            let [a, b, c] = el.map(|v| vertices[v]);
            let twice_area = cross(sub(b, a), sub(c, a));
            let scale = norm(sub(b, a)).max(norm(sub(c, a)));
            if !(twice_area.abs() > T::epsilon() * T::lit(16.0) * scale * scale) {
                return Err(AfemError::DegenerateElement { element: i });
            }
            if twice_area < T::zero() {
                el.swap(1, 2);
            }
        }

        let mut use_count: HashMap<(usize, usize), usize> = HashMap::new();
        let mut single_edges = Vec::new();
        for el in &elements {
            for i in 0..3 {
                *use_count.entry(edge_key(el[(i + 1) % 3], el[(i + 2) % 3])).or_insert(0) += 1;
            }
        }
        for el in &elements {
            for i in 0..3 {
                let key = edge_key(el[(i + 1) % 3], el[(i + 2) % 3]);
                match use_count[&key] {
                    1 => single_edges.push(key),
                    2 => {}
                    n => {
                        return Err(AfemError::NonConforming(format!(
                            "edge ({}, {}) is shared by {n} elements",
                            key.0, key.1
                        )))
                    }
                }
            }
        }
        detect_hanging_nodes(&vertices, &single_edges)?;

        let mut listed: HashMap<(usize, usize), i32> = HashMap::new();
        for be in &boundary_edges {
            if use_count.get(&be.key()) != Some(&1) {
                return Err(AfemError::NonConforming(format!(
                    "listed boundary edge ({}, {}) is not on the boundary",
                    be.vertices[0], be.vertices[1]
                )));
            }
            listed.insert(be.key(), be.marker);
        }
        let boundary = single_edges
            .iter()
            .map(|&(a, b)| BoundaryEdge::new(a, b, *listed.get(&(a, b)).unwrap_or(&DEFAULT_BOUNDARY_MARKER)))
            .collect();

        let n = elements.len();
        Ok(Mesh {
            vertices,
            elements,
            boundary_edges: boundary,
            subdomain,
            generation: vec![0; n],
        })
    }

    pub(crate) fn from_parts(
        vertices: Vec<Point<T>>,
        elements: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        subdomain: Vec<usize>,
        generation: Vec<u32>,
    ) -> Self {
        Mesh {
            vertices,
            elements,
            boundary_edges,
            subdomain,
            generation,
        }
    }

    /// Relabels every element so that its longest edge is the refinement edge.
    ///
    /// Ties between equally long edges (relative tolerance `1e-12`) go to the
    /// edge with the lexicographically smallest sorted vertex-index pair.
    /// Orientation is preserved by rotating, never by reflecting.
    pub fn assign_initial_labels(&self) -> Self {
        let tie = T::lit(1e-12);
        let elements = self
            .elements
            .iter()
            .map(|el| {
                let mut best = 0usize;
                let mut best_len = T::neg_infinity();
                for i in 0..3 {
                    let (a, b) = (el[(i + 1) % 3], el[(i + 2) % 3]);
                    let len = norm(sub(self.vertices[a], self.vertices[b]));
                    let better = if len > best_len * (T::one() + tie) {
                        true
                    } else if len >= best_len * (T::one() - tie) {
                        let bk = (el[(best + 1) % 3], el[(best + 2) % 3]);
                        edge_key(a, b) < edge_key(bk.0, bk.1)
                    } else {
                        false
                    };
                    if better {
                        best = i;
                        best_len = len;
                    }
                }
                [el[best], el[(best + 1) % 3], el[(best + 2) % 3]]
            })
            .collect();
        Mesh {
            elements,
            ..self.clone()
        }
    }

    /// Number of distinct subdomain labels in use.
    pub fn n_subdomains(&self) -> usize {
        let mut labels = self.subdomain.clone();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }

    pub fn coords(&self, element: usize) -> [Point<T>; 3] {
        self.elements[element].map(|v| self.vertices[v])
    }

    pub fn area(&self, element: usize) -> T {
        let [a, b, c] = self.coords(element);
        T::lit(0.5) * cross(sub(b, a), sub(c, a))
    }

    pub fn centroid(&self, element: usize) -> Point<T> {
        let [a, b, c] = self.coords(element);
        let third = T::one() / T::lit(3.0);
        [(a[0] + b[0] + c[0]) * third, (a[1] + b[1] + c[1]) * third]
    }

    /// Element diameter `h_K`: the longest edge length.
    pub fn element_diameter(&self, element: usize) -> T {
        let [a, b, c] = self.coords(element);
        norm(sub(a, b)).max(norm(sub(b, c))).max(norm(sub(c, a)))
    }

    /// Largest element diameter.
    pub fn mesh_size(&self) -> T {
        (0..self.n_elements())
            .map(|k| self.element_diameter(k))
            .fold(T::zero(), T::max)
    }

    /// Smallest interior angle over all elements, in radians.
    pub fn min_angle(&self) -> T {
        (0..self.n_elements())
            .map(|k| {
                let p = self.coords(k);
                (0..3)
                    .map(|i| {
                        let u = sub(p[(i + 1) % 3], p[i]);
                        let v = sub(p[(i + 2) % 3], p[i]);
                        cross(u, v).abs().atan2(dot(u, v))
                    })
                    .fold(T::infinity(), T::min)
            })
            .fold(T::infinity(), T::min)
    }

    /// Flags for vertices lying on the domain boundary.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut flags = vec![false; self.n_vertices()];
        for be in &self.boundary_edges {
            flags[be.vertices[0]] = true;
            flags[be.vertices[1]] = true;
        }
        flags
    }

    /// For every vertex, the elements containing it (the vertex star `ω_z`), in ascending order.
    pub fn vertex_patches(&self) -> Vec<Vec<usize>> {
        let mut patches = vec![Vec::new(); self.n_vertices()];
        for (k, el) in self.elements.iter().enumerate() {
            for &v in el {
                patches[v].push(k);
            }
        }
        patches
    }

    /// For every element, the elements sharing at least one vertex with it (`ω_K`, including `K`).
    pub fn element_patches(&self) -> Vec<Vec<usize>> {
        let stars = self.vertex_patches();
        self.elements
            .iter()
            .map(|el| {
                let mut patch: Vec<usize> = el.iter().flat_map(|&v| stars[v].iter().copied()).collect();
                patch.sort_unstable();
                patch.dedup();
                patch
            })
            .collect()
    }

    /// Gradients of the three P1 basis functions on an element.
    pub fn basis_gradients(&self, element: usize) -> [Point<T>; 3] {
        basis_gradients(&self.coords(element))
    }

    /// Verifies conformity: every edge is shared by at most two elements and
    /// the edges used once are exactly the boundary edges.
    pub fn check_conformity(&self) -> Result<()> {
        let mut use_count: HashMap<(usize, usize), usize> = HashMap::new();
        for el in &self.elements {
            for i in 0..3 {
                *use_count.entry(edge_key(el[(i + 1) % 3], el[(i + 2) % 3])).or_insert(0) += 1;
            }
        }
        let boundary: HashMap<(usize, usize), i32> =
            self.boundary_edges.iter().map(|be| (be.key(), be.marker)).collect();
        for (key, &count) in &use_count {
            let on_boundary = boundary.contains_key(key);
            match (count, on_boundary) {
                (1, true) | (2, false) => {}
                (1, false) => {
                    return Err(AfemError::NonConforming(format!(
                        "edge ({}, {}) has one element but is not a boundary edge",
                        key.0, key.1
                    )))
                }
                _ => {
                    return Err(AfemError::NonConforming(format!(
                        "edge ({}, {}) is shared by {count} elements",
                        key.0, key.1
                    )))
                }
            }
        }
        if boundary.len() != self.boundary_edges.len() || boundary.keys().any(|k| !use_count.contains_key(k)) {
            return Err(AfemError::NonConforming("boundary edge list is inconsistent".into()));
        }
        for k in 0..self.n_elements() {
            if self.area(k) <= T::zero() {
                return Err(AfemError::DegenerateElement { element: k });
            }
        }
        Ok(())
    }
}

/// P1 basis gradients on a counter-clockwise triangle.
pub(crate) fn basis_gradients<T: Real>(p: &[Point<T>; 3]) -> [Point<T>; 3] {
    let twice_area = cross(sub(p[1], p[0]), sub(p[2], p[0]));
    let mut grads = [[T::zero(); 2]; 3];
    for (i, g) in grads.iter_mut().enumerate() {
        let a = p[(i + 1) % 3];
        let b = p[(i + 2) % 3];
        *g = [(a[1] - b[1]) / twice_area, (b[0] - a[0]) / twice_area];
    }
    grads
}

/// Hanging nodes show up as two boundary-candidate edges that share an
/// endpoint, point the same way and are collinear.
fn detect_hanging_nodes<T: Real>(vertices: &[Point<T>], single_edges: &[(usize, usize)]) -> Result<()> {
    let mut at_vertex: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &(a, b)) in single_edges.iter().enumerate() {
        at_vertex.entry(a).or_default().push(i);
        at_vertex.entry(b).or_default().push(i);
    }
    let tol = T::lit(1e-10);
    for (&v, edges) in &at_vertex {
        for (i, &ei) in edges.iter().enumerate() {
            for &ej in &edges[i + 1..] {
                let other = |e: (usize, usize)| if e.0 == v { e.1 } else { e.0 };
                let di = sub(vertices[other(single_edges[ei])], vertices[v]);
                let dj = sub(vertices[other(single_edges[ej])], vertices[v]);
                let (li, lj) = (norm(di), norm(dj));
                if cross(di, dj).abs() <= tol * li * lj && dot(di, dj) > T::zero() {
                    return Err(AfemError::NonConforming(format!(
                        "overlapping boundary edges at vertex {v} (hanging node)"
                    )));
                }
            }
        }
    }
    Ok(())
}
