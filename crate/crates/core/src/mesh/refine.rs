//! Newest-vertex bisection with recursive compatible closure.

use std::collections::HashMap;

use super::{edge_key, BoundaryEdge, MarkSet, Mesh};
use crate::error::{AfemError, Result};
use crate::scalar::Real;

const NONE: usize = usize::MAX;

/// A refined mesh together with the ancestor (in the input mesh) of every new element.
#[derive(Debug, Clone)]
pub struct Refinement<T> {
    pub mesh: Mesh<T>,
    /// `origin[k]` is the index in the input mesh of the element that new element `k` descends from.
    pub origin: Vec<usize>,
    /// Number of vertices of the input mesh; vertices with larger indices are new.
    pub old_vertex_count: usize,
}

/// Bisects one element (plus the closure needed to stay conforming).
pub fn bisect<T: Real>(mesh: &Mesh<T>, element: usize) -> Result<Mesh<T>> {
    refine(mesh, &MarkSet::new(vec![element]), 1)
}

/// Refines every marked element through `depth` bisection generations.
///
/// With `depth = 3` each marked element ends up with a new vertex strictly
/// inside it and a new vertex inside each of its edges.
pub fn refine<T: Real>(mesh: &Mesh<T>, marks: &MarkSet, depth: usize) -> Result<Mesh<T>> {
    refine_tracked(mesh, marks, depth).map(|r| r.mesh)
}

/// Like [`refine`], also reporting which input element each output element came from.
pub fn refine_tracked<T: Real>(mesh: &Mesh<T>, marks: &MarkSet, depth: usize) -> Result<Refinement<T>> {
    if depth != 1 && depth != 3 {
        return Err(AfemError::InvalidDepth(depth));
    }
    marks.check_against(mesh)?;
    let mut work = Bisector::new(mesh);
    let start_generation = mesh.generation.clone();
    for round in 1..=depth as u32 {
        let targets: Vec<usize> = (0..work.elements.len())
            .filter(|&k| {
                let o = work.origin[k];
                marks.contains(o) && work.generation[k] - start_generation[o] < round
            })
            .collect();
        let round_start: Vec<u32> = work.generation.clone();
        for k in targets {
            // Skip elements already split by the closure of an earlier target this round.
            if work.generation[k] == round_start[k] {
                work.bisect(k)?;
            }
        }
    }
    Ok(work.finish(mesh.vertices.len()))
}

#[derive(Clone, Copy)]
struct EdgeElems([usize; 2]);

impl EdgeElems {
    fn other(&self, e: usize) -> Option<usize> {
        let [a, b] = self.0;
        if a == e && b != NONE {
            Some(b)
        } else if b == e && a != NONE {
            Some(a)
        } else {
            None
        }
    }
}

struct Bisector<T> {
    vertices: Vec<[T; 2]>,
    elements: Vec<[usize; 3]>,
    subdomain: Vec<usize>,
    generation: Vec<u32>,
    origin: Vec<usize>,
    edges: HashMap<(usize, usize), EdgeElems>,
    boundary: HashMap<(usize, usize), i32>,
    boundary_order: Vec<(usize, usize)>,
    midpoints: HashMap<(usize, usize), usize>,
    forced: usize,
}

impl<T: Real> Bisector<T> {
    fn new(mesh: &Mesh<T>) -> Self {
        let mut edges: HashMap<(usize, usize), EdgeElems> = HashMap::with_capacity(mesh.n_elements() * 2);
        for (k, el) in mesh.elements.iter().enumerate() {
            for i in 0..3 {
                let key = edge_key(el[(i + 1) % 3], el[(i + 2) % 3]);
                let slot = edges.entry(key).or_insert(EdgeElems([NONE, NONE]));
                if slot.0[0] == NONE {
                    slot.0[0] = k;
                } else {
                    slot.0[1] = k;
                }
            }
        }
        Bisector {
            vertices: mesh.vertices.clone(),
            elements: mesh.elements.clone(),
            subdomain: mesh.subdomain.clone(),
            generation: mesh.generation.clone(),
            origin: (0..mesh.n_elements()).collect(),
            edges,
            boundary: mesh.boundary_edges.iter().map(|b| (b.key(), b.marker)).collect(),
            boundary_order: mesh.boundary_edges.iter().map(|b| b.key()).collect(),
            midpoints: HashMap::new(),
            forced: 0,
        }
    }

    fn refinement_edge(&self, k: usize) -> (usize, usize) {
        let el = self.elements[k];
        edge_key(el[1], el[2])
    }

    fn bisect(&mut self, k: usize) -> Result<()> {
        let key = self.refinement_edge(k);
        loop {
            let neighbor = self.edges.get(&key).and_then(|e| e.other(k));
            match neighbor {
                None => {
                    self.split(k);
                    return Ok(());
                }
                Some(n) if self.refinement_edge(n) == key => {
                    self.split(k);
                    self.split(n);
                    return Ok(());
                }
                Some(n) => {
                    self.forced += 1;
                    let cap = 2 * self.elements.len();
                    if self.forced > cap {
                        return Err(AfemError::ClosureDepthExceeded { cap });
                    }
                    // After this the neighbour across `key` is a child whose
                    // refinement edge is `key`.
                    self.bisect(n)?;
                }
            }
        }
    }

    fn midpoint(&mut self, a: usize, b: usize) -> usize {
        let key = edge_key(a, b);
        if let Some(&m) = self.midpoints.get(&key) {
            return m;
        }
        let (pa, pb) = (self.vertices[a], self.vertices[b]);
        let half = T::lit(0.5);
        self.vertices.push([(pa[0] + pb[0]) * half, (pa[1] + pb[1]) * half]);
        let m = self.vertices.len() - 1;
        self.midpoints.insert(key, m);
        if let Some(marker) = self.boundary.remove(&key) {
            self.boundary.insert(edge_key(a, m), marker);
            self.boundary.insert(edge_key(m, b), marker);
        }
        m
    }

    fn detach(&mut self, key: (usize, usize), k: usize) {
        if let Some(slot) = self.edges.get_mut(&key) {
            for s in slot.0.iter_mut() {
                if *s == k {
                    *s = NONE;
                }
            }
            if slot.0 == [NONE, NONE] {
                self.edges.remove(&key);
            }
        }
    }

    fn attach(&mut self, key: (usize, usize), k: usize) {
        let slot = self.edges.entry(key).or_insert(EdgeElems([NONE, NONE]));
        if slot.0[0] == NONE {
            slot.0[0] = k;
        } else {
            slot.0[1] = k;
        }
    }

    /// Splits element `k` at the midpoint of its refinement edge. The first
    /// child reuses slot `k`, the second is appended.
    fn split(&mut self, k: usize) {
        let [p, a, b] = self.elements[k];
        let m = self.midpoint(a, b);
        self.detach(edge_key(p, a), k);
        self.detach(edge_key(a, b), k);
        self.detach(edge_key(b, p), k);

        let k2 = self.elements.len();
        self.elements[k] = [m, p, a];
        self.elements.push([m, b, p]);
        let generation = self.generation[k] + 1;
        self.generation[k] = generation;
        self.generation.push(generation);
        self.subdomain.push(self.subdomain[k]);
        self.origin.push(self.origin[k]);

        self.attach(edge_key(m, p), k);
        self.attach(edge_key(p, a), k);
        self.attach(edge_key(a, m), k);
        self.attach(edge_key(m, b), k2);
        self.attach(edge_key(b, p), k2);
        self.attach(edge_key(p, m), k2);
    }

    fn finish(self, old_vertex_count: usize) -> Refinement<T> {
        // Rebuild the boundary list in a deterministic order: original edges in
        // their input order, split edges replaced in place by their halves.
        let mut boundary_edges = Vec::with_capacity(self.boundary.len());
        let mut stack = Vec::new();
        for &key in &self.boundary_order {
            stack.push(key);
            while let Some((a, b)) = stack.pop() {
                if let Some(&marker) = self.boundary.get(&(a, b)) {
                    boundary_edges.push(BoundaryEdge::new(a, b, marker));
                } else if let Some(&m) = self.midpoints.get(&(a, b)) {
                    stack.push(edge_key(m, b));
                    stack.push(edge_key(a, m));
                }
            }
        }
        Refinement {
            mesh: Mesh::from_parts(
                self.vertices,
                self.elements,
                boundary_edges,
                self.subdomain,
                self.generation,
            ),
            origin: self.origin,
            old_vertex_count,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cross, sub};

    fn right_triangle() -> Mesh<f64> {
        Mesh::build(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], vec![], None)
            .unwrap()
            .assign_initial_labels()
    }

    /// Independent audit: every edge appears at most twice and no vertex lies
    /// strictly inside any edge.
    fn audit(m: &Mesh<f64>) {
        m.check_conformity().unwrap();
        let mut edges = Vec::new();
        for el in m.elements() {
            for i in 0..3 {
                edges.push(edge_key(el[i], el[(i + 1) % 3]));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        for &(a, b) in &edges {
            let (pa, pb) = (m.vertices()[a], m.vertices()[b]);
            for (v, &p) in m.vertices().iter().enumerate() {
                if v == a || v == b {
                    continue;
                }
                let d = sub(pb, pa);
                let w = sub(p, pa);
                let t = (w[0] * d[0] + w[1] * d[1]) / (d[0] * d[0] + d[1] * d[1]);
                assert!(
                    !(cross(d, w).abs() < 1e-12 && t > 1e-12 && t < 1.0 - 1e-12),
                    "vertex {v} hangs on edge ({a},{b})"
                );
            }
        }
    }

    #[test]
    fn single_triangle_bisection() {
        let m = bisect(&right_triangle(), 0).unwrap();
        assert_eq!(m.n_elements(), 2);
        assert_eq!(m.n_vertices(), 4);
        for el in m.elements() {
            assert_eq!(el[0], 3);
        }
        assert_eq!(m.vertices()[3], [0.5, 0.5]);
        assert_eq!(m.generations(), &[1, 1]);
        // Child refinement edges are the parent's legs.
        let mut legs: Vec<_> = m.elements().iter().map(|e| edge_key(e[1], e[2])).collect();
        legs.sort_unstable();
        assert_eq!(legs, vec![(0, 1), (0, 2)]);
        audit(&m);
    }

    #[test]
    fn shared_refinement_edge_bisects_both() {
        let m = Mesh::build(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[1, 2, 0], [3, 0, 2]],
            vec![],
            None,
        )
        .unwrap()
        .assign_initial_labels();
        let r = bisect(&m, 0).unwrap();
        assert_eq!(r.n_elements(), 4);
        assert_eq!(r.n_vertices(), 5);
        audit(&r);
    }

    #[test]
    fn closure_recursion_keeps_conformity() {
        // Shared edge (1,2) is the refinement edge of element 1 only.
        let m = Mesh::build(
            vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.2]],
            vec![[0, 1, 2], [3, 2, 1]],
            vec![],
            None,
        )
        .unwrap();
        let m = Mesh::from_parts(
            m.vertices().to_vec(),
            vec![[2, 0, 1], [3, 2, 1]],
            m.boundary_edges().to_vec(),
            vec![0, 0],
            vec![0, 0],
        );
        let r = refine_tracked(&m, &MarkSet::new(vec![1]), 1).unwrap();
        assert!(r.mesh.n_elements() >= 4);
        audit(&r.mesh);
        // Element 0 was forced to split first on (0,1), then its child on (1,2).
        assert_eq!(r.mesh.n_elements(), 5);
    }

    #[test]
    fn depth_one_and_three_counts() {
        assert_eq!(
            refine(&right_triangle(), &MarkSet::new(vec![0]), 1)
                .unwrap()
                .n_elements(),
            2
        );
        let r = refine_tracked(&right_triangle(), &MarkSet::new(vec![0]), 3).unwrap();
        assert_eq!(r.mesh.n_elements(), 8);
        audit(&r.mesh);
    }

    #[test]
    fn depth_three_interior_node_property() {
        let base = right_triangle();
        let r = refine_tracked(&base, &MarkSet::new(vec![0]), 3).unwrap();
        let [a, b, c] = base.coords(0);
        let new: Vec<[f64; 2]> = r.mesh.vertices()[r.old_vertex_count..].to_vec();
        let inside = |p: [f64; 2]| {
            let s = [
                cross(sub(b, a), sub(p, a)),
                cross(sub(c, b), sub(p, b)),
                cross(sub(a, c), sub(p, c)),
            ];
            s.iter().all(|&x| x > 1e-12)
        };
        assert!(new.iter().any(|&p| inside(p)));
        for (p, q) in [(a, b), (b, c), (c, a)] {
            let on_edge = new.iter().any(|&x| {
                let d = sub(q, p);
                let w = sub(x, p);
                let t = (w[0] * d[0] + w[1] * d[1]) / (d[0] * d[0] + d[1] * d[1]);
                cross(d, w).abs() < 1e-12 && t > 1e-12 && t < 1.0 - 1e-12
            });
            assert!(on_edge);
        }
    }

    #[test]
    fn empty_marks_identity() {
        let m = right_triangle();
        assert_eq!(refine(&m, &MarkSet::empty(), 1).unwrap(), m);
        assert_eq!(refine(&m, &MarkSet::empty(), 3).unwrap(), m);
    }

    #[test]
    fn invalid_depth_and_marks() {
        let m = right_triangle();
        assert_eq!(
            refine(&m, &MarkSet::new(vec![0]), 2).unwrap_err(),
            AfemError::InvalidDepth(2)
        );
        assert!(matches!(
            refine(&m, &MarkSet::new(vec![4]), 1).unwrap_err(),
            AfemError::BadIndex { .. }
        ));
    }

    #[test]
    fn child_diameter_after_one_bisection() {
        let m = bisect(&right_triangle(), 0).unwrap();
        for k in 0..2 {
            assert!((m.element_diameter(k) - 1.0).abs() < 1e-15);
            assert!((m.area(k) - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn subdomain_labels_inherited() {
        let m = Mesh::build(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[1, 2, 0], [3, 0, 2]],
            vec![],
            Some(vec![4, 9]),
        )
        .unwrap()
        .assign_initial_labels();
        let r = refine_tracked(&m, &MarkSet::all(&m), 3).unwrap();
        for k in 0..r.mesh.n_elements() {
            assert_eq!(r.mesh.subdomain(k), [4, 9][r.origin[k]]);
        }
    }
}
