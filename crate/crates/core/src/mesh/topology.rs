use std::collections::HashMap;

use super::{edge_key, Mesh};
use crate::scalar::{norm, sub, Point, Real};

/// One mesh edge with its adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    /// Sorted vertex pair.
    pub vertices: [usize; 2],
    /// Adjacent elements; `elements[0]` has the lower index.
    pub elements: [Option<usize>; 2],
    /// Unit normal pointing out of `elements[0]` (outward on the boundary).
    pub normal: Point<T>,
    pub length: T,
    pub boundary_marker: Option<i32>,
    /// True when the two adjacent elements carry different subdomain labels.
    pub interface: bool,
}

impl<T> Edge<T> {
    pub fn is_boundary(&self) -> bool {
        self.elements[1].is_none()
    }
}

/// Edge list plus, for every element, the index of the edge opposite each local vertex.
#[derive(Debug, Clone)]
pub struct EdgeTopology<T> {
    pub edges: Vec<Edge<T>>,
    pub element_edges: Vec<[usize; 3]>,
}

impl<T: Real> EdgeTopology<T> {
    pub fn n_interior(&self) -> usize {
        self.edges.iter().filter(|e| !e.is_boundary()).count()
    }

    pub fn n_boundary(&self) -> usize {
        self.edges.len() - self.n_interior()
    }
}

impl<T: Real> Mesh<T> {
    /// Builds the edge list with adjacency, normals and interface flags.
    pub fn edge_topology(&self) -> EdgeTopology<T> {
        let markers: HashMap<(usize, usize), i32> = self.boundary_edges.iter().map(|b| (b.key(), b.marker)).collect();
        let mut index: HashMap<(usize, usize), usize> = HashMap::with_capacity(self.n_elements() * 2);
        let mut edges: Vec<Edge<T>> = Vec::new();
        let mut element_edges = vec![[0usize; 3]; self.n_elements()];
        for (k, el) in self.elements.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = (el[(i + 1) % 3], el[(i + 2) % 3]);
                let key = edge_key(a, b);
                let e = *index.entry(key).or_insert_with(|| {
                    // First visit is from the lower element index, traversed counter-clockwise.
                    let d = sub(self.vertices[b], self.vertices[a]);
                    let len = norm(d);
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        elements: [Some(k), None],
                        normal: [d[1] / len, -d[0] / len],
                        length: len,
                        boundary_marker: markers.get(&key).copied(),
                        interface: false,
                    });
                    edges.len() - 1
                });
                if edges[e].elements[0] != Some(k) {
                    edges[e].elements[1] = Some(k);
                    let lo = edges[e].elements[0].unwrap();
                    edges[e].interface = self.subdomain[lo] != self.subdomain[k];
                }
                element_edges[k][i] = e;
            }
        }
        EdgeTopology { edges, element_edges }
    }
}
