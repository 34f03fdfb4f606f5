//! Plain-text node/element mesh format.
//!
//! ```text
//! NV NE NB
//! x y                 (NV lines)
//! i j k label         (NE lines, zero-based vertex indices)
//! a b marker          (NB lines)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write;

use super::{BoundaryEdge, Mesh};
use crate::error::{AfemError, Result};
use crate::scalar::Real;

pub fn write_mesh_text<T: Real>(mesh: &Mesh<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {}",
        mesh.n_vertices(),
        mesh.n_elements(),
        mesh.boundary_edges().len()
    );
    for p in mesh.vertices() {
        let _ = writeln!(out, "{} {}", p[0], p[1]);
    }
    for (el, label) in mesh.elements().iter().zip(mesh.subdomains()) {
        let _ = writeln!(out, "{} {} {} {}", el[0], el[1], el[2], label);
    }
    for be in mesh.boundary_edges() {
        let _ = writeln!(out, "{} {} {}", be.vertices[0], be.vertices[1], be.marker);
    }
    out
}

pub fn parse_mesh_text<T: Real>(text: &str) -> Result<Mesh<T>> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| AfemError::Parse(format!("unexpected end of input, expected {what}")))
    };
    let (ln, header) = next("header")?;
    let counts: Vec<usize> = fields(ln, header, 3)?;
    let (nv, ne, nb) = (counts[0], counts[1], counts[2]);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, line) = next("vertex")?;
        let xy: Vec<f64> = fields(ln, line, 2)?;
        vertices.push([T::lit(xy[0]), T::lit(xy[1])]);
    }
    let mut elements = Vec::with_capacity(ne);
    let mut labels = Vec::with_capacity(ne);
    for _ in 0..ne {
        let (ln, line) = next("element")?;
        let v: Vec<usize> = fields(ln, line, 4)?;
        elements.push([v[0], v[1], v[2]]);
        labels.push(v[3]);
    }
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (ln, line) = next("boundary edge")?;
        let v: Vec<i64> = fields(ln, line, 3)?;
        if v[0] < 0 || v[1] < 0 {
            return Err(AfemError::Parse(format!("line {}: negative vertex index", ln + 1)));
        }
        boundary.push(BoundaryEdge::new(v[0] as usize, v[1] as usize, v[2] as i32));
    }
    Mesh::build(vertices, elements, boundary, Some(labels))
}

fn fields<F: std::str::FromStr>(line_no: usize, line: &str, n: usize) -> Result<Vec<F>> {
    let parsed: Vec<F> = line
        .split_whitespace()
        .map(|s| s.parse::<F>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| AfemError::Parse(format!("line {}: malformed `{line}`", line_no + 1)))?;
    if parsed.len() != n {
        return Err(AfemError::Parse(format!(
            "line {}: expected {n} fields, found {}",
            line_no + 1,
            parsed.len()
        )));
    }
    Ok(parsed)
}
