use crate::error::{Error, Result};
use crate::fem::CsrMatrix;

/// Iteration cap as a multiple of the system dimension.
const MAX_ITER_FACTOR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    /// Final `‖b − Ax‖₂ / ‖b‖₂` of the recursively updated residual.
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients with reusable work vectors.
#[derive(Debug, Clone)]
pub struct JacobiPcg {
    inv_diag: Vec<f64>,
    r: Vec<f64>,
    z: Vec<f64>,
    p: Vec<f64>,
    ap: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl JacobiPcg {
    pub fn new(mat: &CsrMatrix) -> Self {
        let n = mat.dim();
        let inv_diag = mat
            .diagonal()
            .into_iter()
            .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect();
        Self { inv_diag, r: vec![0.0; n], z: vec![0.0; n], p: vec![0.0; n], ap: vec![0.0; n] }
    }

    /// Solves `mat · x = rhs` in place, starting from the incoming `x`.
    pub fn solve(&mut self, mat: &CsrMatrix, rhs: &[f64], x: &mut [f64], rel_tol: f64) -> Result<CgOutcome> {
        let n = mat.dim();
        if !(rel_tol > 0.0 && rel_tol < 1.0) {
            return Err(Error::invalid(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
        }
        if rhs.len() != n || x.len() != n {
            return Err(Error::invalid("dimension mismatch in CG solve"));
        }
        let rhs_norm = dot(rhs, rhs).sqrt();
        if rhs_norm == 0.0 {
            x.fill(0.0);
            return Ok(CgOutcome { iterations: 0, residual: 0.0 });
        }
        let target = rel_tol * rhs_norm;
        mat.matvec(x, &mut self.r);
        for (r, b) in self.r.iter_mut().zip(rhs) {
            *r = b - *r;
        }
        let mut res = dot(&self.r, &self.r).sqrt();
        if res <= target {
            return Ok(CgOutcome { iterations: 0, residual: res / rhs_norm });
        }
        for i in 0..n {
            self.z[i] = self.inv_diag[i] * self.r[i];
        }
        self.p.copy_from_slice(&self.z);
        let mut rz = dot(&self.r, &self.z);
        let max_iter = MAX_ITER_FACTOR * n.max(1);
        for it in 1..=max_iter {
            mat.matvec(&self.p, &mut self.ap);
            let pap = dot(&self.p, &self.ap);
            if !(pap > 0.0) {
                return Err(Error::SolveFailure { iterations: it, residual: res / rhs_norm });
            }
            let step = rz / pap;
            for i in 0..n {
                x[i] += step * self.p[i];
                self.r[i] -= step * self.ap[i];
            }
            res = dot(&self.r, &self.r).sqrt();
            if res <= target {
                return Ok(CgOutcome { iterations: it, residual: res / rhs_norm });
            }
            for i in 0..n {
                self.z[i] = self.inv_diag[i] * self.r[i];
            }
            let rz_new = dot(&self.r, &self.z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                self.p[i] = self.z[i] + beta * self.p[i];
            }
        }
        Err(Error::SolveFailure { iterations: max_iter, residual: res / rhs_norm })
    }
}

/// One-shot solve from the initial guess `x0`.
pub fn cg_solve(mat: &CsrMatrix, rhs: &[f64], x0: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    let mut x = x0.to_vec();
    JacobiPcg::new(mat).solve(mat, rhs, &mut x, rel_tol)?;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_system() {
        let m = CsrMatrix::from_dense(&[vec![4.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let x = cg_solve(&m, &[1.0, 0.0, 0.0], &[0.0; 3], 1e-12).unwrap();
        assert!((x[0] - 0.25).abs() < 1e-15 && x[1] == 0.0 && x[2] == 0.0);
    }

    #[test]
    fn unit_diagonal_returns_rhs() {
        let m = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let x = cg_solve(&m, &[1.0, 0.0], &[0.0; 2], 1e-12).unwrap();
        assert_eq!(x, vec![1.0, 0.0]);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let m = CsrMatrix::from_dense(&[vec![2.0, -1.0], vec![-1.0, 2.0]]);
        assert_eq!(cg_solve(&m, &[0.0, 0.0], &[3.0, 4.0], 1e-10).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn indefinite_matrix_fails() {
        let m = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        let err = cg_solve(&m, &[1.0, 1.0], &[0.0; 2], 1e-10).unwrap_err();
        assert!(matches!(err, Error::SolveFailure { .. }));
    }

    #[test]
    fn rejects_bad_tolerance() {
        let m = CsrMatrix::from_dense(&[vec![1.0]]);
        assert!(cg_solve(&m, &[1.0], &[0.0], 0.0).is_err());
    }
}
