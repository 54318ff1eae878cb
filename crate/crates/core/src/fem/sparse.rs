use crate::error::{Error, Result};
use crate::fem::DofMap;
use crate::mesh::Mesh;

/// Square matrix in compressed sparse row form.
///
/// Matrices assembled on the same mesh and dof map share the pattern built
/// by [`CsrMatrix::pattern`], which is what [`CsrMatrix::combine`] relies on.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with one entry per pair of dofs whose vertices share a cell.
    pub fn pattern(mesh: &Mesh, dofs: &DofMap) -> Self {
        let n = dofs.n_dofs();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for cell in mesh.cells() {
            for &a in cell {
                let Some(na) = dofs.node(a) else { continue };
                for &b in cell {
                    let Some(nb) = dofs.node(b) else { continue };
                    for i in 0..2 {
                        rows[2 * na + i].extend([2 * nb, 2 * nb + 1]);
                    }
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable();
            row.dedup();
            col_idx.extend(row);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        Self { n, row_ptr, col_idx, values }
    }

    /// Builds a matrix from dense row-major data, keeping nonzeros only.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for row in rows {
            assert_eq!(row.len(), n, "dense input must be square");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn position(&self, row: usize, col: usize) -> Option<usize> {
        let cols = &self.col_idx[self.row_ptr[row]..self.row_ptr[row + 1]];
        cols.binary_search(&col).ok().map(|k| self.row_ptr[row] + k)
    }

    /// Adds to an entry of the pattern; panics if `(row, col)` is not stored.
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        let pos = self
            .position(row, col)
            .unwrap_or_else(|| panic!("entry ({row}, {col}) is not in the sparsity pattern"));
        self.values[pos] += value;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.position(row, col).map_or(0.0, |p| self.values[p])
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (row, out) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0;
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    /// `y += s A x`.
    pub fn matvec_add(&self, s: f64, x: &[f64], y: &mut [f64]) {
        for (row, out) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0;
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out += s * acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec(x, &mut y);
        y
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `a·self + b·other`; both must share a pattern.
    pub fn combine(&self, a: f64, other: &CsrMatrix, b: f64) -> Result<CsrMatrix> {
        if self.row_ptr != other.row_ptr || self.col_idx != other.col_idx {
            return Err(Error::invalid("matrices do not share a sparsity pattern"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(CsrMatrix { values, ..self.clone() })
    }

    pub fn scaled(&self, s: f64) -> CsrMatrix {
        CsrMatrix { values: self.values.iter().map(|v| s * v).collect(), ..self.clone() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Bitwise comparison of every stored entry with its transpose.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|row| {
            (self.row_ptr[row]..self.row_ptr[row + 1]).all(|k| {
                let col = self.col_idx[k];
                self.position(col, row).is_some_and(|p| self.values[p] == self.values[k])
            })
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for (row, dense) in out.iter_mut().enumerate() {
            for k in self.row_ptr[row]..self.row_ptr[row + 1] {
                dense[self.col_idx[k]] = self.values[k];
            }
        }
        out
    }

    /// Bytes held by the index and value arrays.
    pub fn memory_bytes(&self) -> usize {
        self.row_ptr.len() * std::mem::size_of::<usize>()
            + self.col_idx.len() * std::mem::size_of::<usize>()
            + self.values.len() * std::mem::size_of::<f64>()
    }
}
