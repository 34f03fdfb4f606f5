//! Initial meshes for the benchmark problems.

use crate::error::Result;
use crate::mesh::{refine, MarkSet, Mesh};
use crate::scalar::{Point, Real};

/// How each cell of a structured grid is split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellSplit {
    /// Two triangles along the `(x0,y0)-(x1,y1)` diagonal.
    Forward,
    /// Two triangles along the `(x1,y0)-(x0,y1)` diagonal.
    Anti,
    /// Alternating diagonals so that every other grid node is a star of eight triangles.
    UnionJack,
    /// Four triangles meeting at the cell centre.
    CrissCross,
}

/// A structured triangulation of `[x0, x1] × [y0, y1]` with `n × n` cells.
///
/// `label` maps each element centroid to its subdomain label.
pub fn structured<T: Real>(
    lo: Point<T>,
    hi: Point<T>,
    n: usize,
    split: CellSplit,
    label: impl Fn(Point<T>) -> usize,
) -> Result<Mesh<T>> {
    let step = [(hi[0] - lo[0]) / T::from_count(n), (hi[1] - lo[1]) / T::from_count(n)];
    let mut vertices = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([lo[0] + step[0] * T::from_count(i), lo[1] + step[1] * T::from_count(j)]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut elements = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            let forward = match split {
                CellSplit::Forward => true,
                CellSplit::Anti => false,
                CellSplit::UnionJack => (i + j) % 2 == 0,
                CellSplit::CrissCross => {
                    let m = vertices.len();
                    let half = T::lit(0.5);
                    vertices.push([
                        lo[0] + step[0] * (T::from_count(i) + half),
                        lo[1] + step[1] * (T::from_count(j) + half),
                    ]);
                    elements.extend([[a, b, m], [b, c, m], [c, d, m], [d, a, m]]);
                    continue;
                }
            };
            if forward {
                elements.extend([[a, b, c], [a, c, d]]);
            } else {
                elements.extend([[a, b, d], [b, c, d]]);
            }
        }
    }
    with_labels(vertices, elements, label)
}

/// Six right triangles fanning the re-entrant corner of `(-1,1)² \ (0,1)×(-1,0)`,
/// then every element bisected twice.
pub fn lshape_fan<T: Real>() -> Result<Mesh<T>> {
    let p = |x: f64, y: f64| [T::lit(x), T::lit(y)];
    let vertices = vec![
        p(0.0, 0.0),
        p(1.0, 0.0),
        p(1.0, 1.0),
        p(0.0, 1.0),
        p(-1.0, 1.0),
        p(-1.0, 0.0),
        p(-1.0, -1.0),
        p(0.0, -1.0),
    ];
    let elements = vec![[0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 5, 6], [0, 6, 7]];
    let mut mesh = Mesh::build(vertices, elements, vec![], None)?.assign_initial_labels();
    for _ in 0..2 {
        mesh = refine(&mesh, &MarkSet::all(&mesh), 1)?;
    }
    Ok(mesh)
}

fn with_labels<T: Real>(
    vertices: Vec<Point<T>>,
    elements: Vec<[usize; 3]>,
    label: impl Fn(Point<T>) -> usize,
) -> Result<Mesh<T>> {
    let third = T::one() / T::lit(3.0);
    let labels = elements
        .iter()
        .map(|el| {
            let c = [
                (vertices[el[0]][0] + vertices[el[1]][0] + vertices[el[2]][0]) * third,
                (vertices[el[0]][1] + vertices[el[1]][1] + vertices[el[2]][1]) * third,
            ];
            label(c)
        })
        .collect();
    Ok(Mesh::build(vertices, elements, vec![], Some(labels))?.assign_initial_labels())
}
