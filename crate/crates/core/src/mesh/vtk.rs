//! Legacy ASCII VTK export (`DATASET UNSTRUCTURED_GRID`).

use std::fmt::Write;
use std::path::Path;

use super::Mesh;
use crate::error::Result;
use crate::scalar::{Point, Real};

const VTK_TRIANGLE: u8 = 5;

enum Data<T> {
    Scalars(String, Vec<T>),
    Vectors(String, Vec<Point<T>>),
}

/// Builder for a legacy VTK file; subdomain labels are always written as cell data.
pub struct VtkExport<'a, T> {
    mesh: &'a Mesh<T>,
    title: String,
    point_data: Vec<Data<T>>,
    cell_data: Vec<Data<T>>,
}

impl<'a, T: Real> VtkExport<'a, T> {
    pub fn new(mesh: &'a Mesh<T>) -> Self {
        VtkExport {
            mesh,
            title: "afem mesh".to_string(),
            point_data: Vec::new(),
            cell_data: Vec::new(),
        }
    }

    pub fn title(mut self, title: &str) -> Self {
        self.title = title.replace('\n', " ");
        self
    }

    pub fn point_scalars(mut self, name: &str, values: Vec<T>) -> Self {
        assert_eq!(
            values.len(),
            self.mesh.n_vertices(),
            "point field `{name}` has wrong length"
        );
        self.point_data.push(Data::Scalars(sanitize(name), values));
        self
    }

    pub fn point_vectors(mut self, name: &str, values: Vec<Point<T>>) -> Self {
        assert_eq!(
            values.len(),
            self.mesh.n_vertices(),
            "point field `{name}` has wrong length"
        );
        self.point_data.push(Data::Vectors(sanitize(name), values));
        self
    }

    pub fn cell_scalars(mut self, name: &str, values: Vec<T>) -> Self {
        assert_eq!(
            values.len(),
            self.mesh.n_elements(),
            "cell field `{name}` has wrong length"
        );
        self.cell_data.push(Data::Scalars(sanitize(name), values));
        self
    }

    pub fn cell_vectors(mut self, name: &str, values: Vec<Point<T>>) -> Self {
        assert_eq!(
            values.len(),
            self.mesh.n_elements(),
            "cell field `{name}` has wrong length"
        );
        self.cell_data.push(Data::Vectors(sanitize(name), values));
        self
    }

    pub fn render(&self) -> String {
        let m = self.mesh;
        let mut out = String::new();
        let _ = writeln!(out, "# vtk DataFile Version 3.0");
        let _ = writeln!(out, "{}", self.title);
        let _ = writeln!(out, "ASCII");
        let _ = writeln!(out, "DATASET UNSTRUCTURED_GRID");
        let _ = writeln!(out, "POINTS {} double", m.n_vertices());
        for p in m.vertices() {
            let _ = writeln!(out, "{} {} 0", p[0], p[1]);
        }
        let _ = writeln!(out, "CELLS {} {}", m.n_elements(), 4 * m.n_elements());
        for el in m.elements() {
            let _ = writeln!(out, "3 {} {} {}", el[0], el[1], el[2]);
        }
        let _ = writeln!(out, "CELL_TYPES {}", m.n_elements());
        for _ in 0..m.n_elements() {
            let _ = writeln!(out, "{VTK_TRIANGLE}");
        }

        let _ = writeln!(out, "CELL_DATA {}", m.n_elements());
        let _ = writeln!(out, "SCALARS subdomain int 1");
        let _ = writeln!(out, "LOOKUP_TABLE default");
        for s in m.subdomains() {
            let _ = writeln!(out, "{s}");
        }
        for d in &self.cell_data {
            write_data(&mut out, d);
        }
        if !self.point_data.is_empty() {
            let _ = writeln!(out, "POINT_DATA {}", m.n_vertices());
            for d in &self.point_data {
                write_data(&mut out, d);
            }
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

fn write_data<T: Real>(out: &mut String, data: &Data<T>) {
    match data {
        Data::Scalars(name, values) => {
            let _ = writeln!(out, "SCALARS {name} double 1");
            let _ = writeln!(out, "LOOKUP_TABLE default");
            for v in values {
                let _ = writeln!(out, "{v}");
            }
        }
        Data::Vectors(name, values) => {
            let _ = writeln!(out, "VECTORS {name} double");
            for v in values {
                let _ = writeln!(out, "{} {} 0", v[0], v[1]);
            }
        }
    }
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_sections_in_order() {
        let m = Mesh::build(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
            vec![],
            Some(vec![0, 3]),
        )
        .unwrap();
        let text = VtkExport::new(&m)
            .point_scalars("u h", vec![0.0, 1.0, 2.0, 3.0])
            .cell_scalars("eta", vec![0.5, 0.25])
            .render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# vtk DataFile Version 3.0");
        assert_eq!(lines[3], "DATASET UNSTRUCTURED_GRID");
        assert_eq!(lines[4], "POINTS 4 double");
        assert!(text.contains("CELLS 2 8\n3 0 1 2\n3 0 2 3\n"));
        assert!(text.contains("CELL_TYPES 2\n5\n5\n"));
        assert!(text.contains("SCALARS subdomain int 1\nLOOKUP_TABLE default\n0\n3\n"));
        assert!(text.contains("SCALARS eta double 1\nLOOKUP_TABLE default\n0.5\n0.25\n"));
        assert!(text.contains("POINT_DATA 4\nSCALARS u_h double 1"));
        assert!(text.find("CELL_DATA").unwrap() < text.find("POINT_DATA").unwrap());
    }
}
