//! Structured meshes of the unit square.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshKind {
    Triangular,
    Quadrilateral,
}

impl MeshKind {
    pub fn vertices_per_cell(self) -> usize {
        match self {
            MeshKind::Triangular => 3,
            MeshKind::Quadrilateral => 4,
        }
    }

    /// Short name used in CSV files and on the command line.
    pub fn as_str(self) -> &'static str {
        match self {
            MeshKind::Triangular => "tri",
            MeshKind::Quadrilateral => "quad",
        }
    }
}

impl fmt::Display for MeshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeshKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tri" | "triangular" | "triangle" => Ok(MeshKind::Triangular),
            "quad" | "square" | "quadrilateral" => Ok(MeshKind::Quadrilateral),
            other => Err(Error::invalid(format!("unknown mesh kind {other:?} (expected tri or quad)"))),
        }
    }
}

/// Uniform `n × n` grid on `[0, 1]²`, split into triangles along the
/// lower-left to upper-right diagonal when `kind` is triangular.
///
/// Vertices are numbered row-major, `index = j (n + 1) + i` for `(i/n, j/n)`.
/// Cells list their vertices counterclockwise.
#[derive(Debug, Clone)]
pub struct Mesh {
    kind: MeshKind,
    n: usize,
    vertices: Vec<[f64; 2]>,
    cells: Vec<[usize; 4]>,
    boundary: Vec<bool>,
}

impl Mesh {
    pub fn new(kind: MeshKind, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize(n));
        }
        let side = n + 1;
        let inv = 1.0 / n as f64;
        let mut vertices = Vec::with_capacity(side * side);
        let mut boundary = Vec::with_capacity(side * side);
        for j in 0..side {
            for i in 0..side {
                vertices.push([i as f64 * inv, j as f64 * inv]);
                boundary.push(i == 0 || j == 0 || i == n || j == n);
            }
        }
        let cells_per_square = if kind == MeshKind::Triangular { 2 } else { 1 };
        let mut cells = Vec::with_capacity(n * n * cells_per_square);
        for j in 0..n {
            for i in 0..n {
                let v00 = j * side + i;
                let v10 = v00 + 1;
                let v01 = v00 + side;
                let v11 = v01 + 1;
                match kind {
                    MeshKind::Quadrilateral => cells.push([v00, v10, v11, v01]),
                    MeshKind::Triangular => {
                        cells.push([v00, v10, v11, usize::MAX]);
                        cells.push([v00, v11, v01, usize::MAX]);
                    }
                }
            }
        }
        Ok(Self { kind, n, vertices, cells, boundary })
    }

    pub fn kind(&self) -> MeshKind {
        self.kind
    }

    /// Cells per side.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Mesh parameter `h = √2 / n`, the cell diagonal.
    pub fn h(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.n as f64
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Vertex indices of cell `c`, counterclockwise.
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c][..self.kind.vertices_per_cell()]
    }

    pub fn cells(&self) -> impl Iterator<Item = &[usize]> + '_ {
        let nv = self.kind.vertices_per_cell();
        self.cells.iter().map(move |c| &c[..nv])
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    /// Signed area of cell `c` by the shoelace formula.
    pub fn cell_area(&self, c: usize) -> f64 {
        let ids = self.cell(c);
        let mut twice = 0.0;
        for k in 0..ids.len() {
            let [x0, y0] = self.vertices[ids[k]];
            let [x1, y1] = self.vertices[ids[(k + 1) % ids.len()]];
            twice += x0 * y1 - x1 * y0;
        }
        0.5 * twice
    }

    /// Plain-text dump: `kind n`, then one vertex per line, then one cell per line.
    pub fn dump(&self) -> String {
        let mut out = format!("{} {}\n", self.kind, self.n);
        for [x, y] in &self.vertices {
            out.push_str(&format!("{x:.17e} {y:.17e}\n"));
        }
        for cell in self.cells() {
            let line: Vec<String> = cell.iter().map(ToString::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

pub fn build_mesh(kind: MeshKind, n: usize) -> Result<Mesh> {
    Mesh::new(kind, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quad_counts() {
        let m = Mesh::new(MeshKind::Quadrilateral, 4).unwrap();
        assert_eq!(m.n_vertices(), 25);
        assert_eq!(m.n_cells(), 16);
        assert_eq!(m.boundary_mask().iter().filter(|b| !**b).count(), 9);
    }

    #[test]
    fn tri_counts() {
        let m = Mesh::new(MeshKind::Triangular, 4).unwrap();
        assert_eq!(m.n_vertices(), 25);
        assert_eq!(m.n_cells(), 32);
    }

    #[test]
    fn finest_level_h() {
        for kind in [MeshKind::Triangular, MeshKind::Quadrilateral] {
            let m = Mesh::new(kind, 64).unwrap();
            assert_eq!(m.h(), 2f64.sqrt() / 64.0);
            assert!((m.h() * 64.0 - 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn too_small() {
        assert_eq!(Mesh::new(MeshKind::Triangular, 1).unwrap_err(), Error::InvalidSize(1));
    }

    #[test]
    fn areas_positive_and_partition() {
        for kind in [MeshKind::Triangular, MeshKind::Quadrilateral] {
            let m = Mesh::new(kind, 7).unwrap();
            let mut total = 0.0;
            for c in 0..m.n_cells() {
                let a = m.cell_area(c);
                assert!(a > 0.0);
                total += a;
            }
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_mask_matches_coordinates() {
        let m = Mesh::new(MeshKind::Quadrilateral, 5).unwrap();
        for (v, &[x, y]) in m.vertices().iter().enumerate() {
            let on = x == 0.0 || y == 0.0 || x == 1.0 || y == 1.0;
            assert_eq!(m.is_boundary(v), on);
        }
    }

    #[test]
    fn triangle_valence() {
        let n = 6;
        let m = Mesh::new(MeshKind::Triangular, n).unwrap();
        let mut neighbours = vec![std::collections::BTreeSet::new(); m.n_vertices()];
        for cell in m.cells() {
            for &a in cell {
                for &b in cell {
                    if a != b {
                        neighbours[a].insert(b);
                    }
                }
            }
        }
        for v in 0..m.n_vertices() {
            if !m.is_boundary(v) {
                assert_eq!(neighbours[v].len(), 6);
            }
        }
        let corners = [0, n, n * (n + 1), (n + 1) * (n + 1) - 1];
        for c in corners {
            assert!((1..=3).contains(&neighbours[c].len()), "corner {c}");
        }
    }

    #[test]
    fn refinement_nests() {
        for kind in [MeshKind::Triangular, MeshKind::Quadrilateral] {
            let coarse = Mesh::new(kind, 4).unwrap();
            let fine = Mesh::new(kind, 8).unwrap();
            for &[x, y] in coarse.vertices() {
                assert!(fine.vertices().iter().any(|&[u, v]| u == x && v == y));
            }
        }
    }

    #[test]
    fn dump_header() {
        let m = Mesh::new(MeshKind::Triangular, 2).unwrap();
        let d = m.dump();
        assert!(d.starts_with("tri 2\n"));
        assert_eq!(d.lines().count(), 1 + 9 + 8);
    }
}
