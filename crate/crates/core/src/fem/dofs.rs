use crate::mesh::Mesh;

/// Vertex-to-dof numbering. Vertex `v` with index `k` owns dofs `2k` and `2k + 1`.
#[derive(Debug, Clone)]
pub struct DofMap {
    vertex_index: Vec<Option<usize>>,
    n_nodes: usize,
}

impl DofMap {
    /// Interior vertices only (homogeneous Dirichlet boundary).
    pub fn dirichlet(mesh: &Mesh) -> Self {
        let mut next = 0;
        let vertex_index = mesh
            .boundary_mask()
            .iter()
            .map(|&on_boundary| {
                if on_boundary {
                    None
                } else {
                    next += 1;
                    Some(next - 1)
                }
            })
            .collect();
        Self { vertex_index, n_nodes: next }
    }

    /// Every vertex carries dofs; used for rigid-motion and partition-of-unity checks.
    pub fn unconstrained(mesh: &Mesh) -> Self {
        let n = mesh.n_vertices();
        Self { vertex_index: (0..n).map(Some).collect(), n_nodes: n }
    }

    pub fn n_dofs(&self) -> usize {
        2 * self.n_nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn node(&self, vertex: usize) -> Option<usize> {
        self.vertex_index[vertex]
    }

    pub fn dof(&self, vertex: usize, component: usize) -> Option<usize> {
        self.vertex_index[vertex].map(|k| 2 * k + component)
    }

    /// Nodal interpolant of `f` (boundary values are dropped).
    pub fn interpolate<F: Fn(f64, f64) -> [f64; 2]>(&self, mesh: &Mesh, f: F) -> Vec<f64> {
        let mut out = vec![0.0; self.n_dofs()];
        for (v, &[x, y]) in mesh.vertices().iter().enumerate() {
            if let Some(k) = self.vertex_index[v] {
                let val = f(x, y);
                out[2 * k] = val[0];
                out[2 * k + 1] = val[1];
            }
        }
        out
    }
}
