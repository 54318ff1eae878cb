use std::f64::consts::PI;

use fracwave_core::fem::{
    a_form_matrix, assemble_mass, assemble_vector, cg_solve, l2_error, ritz_project, symmetric_part, CsrMatrix,
    JacobiPcg,
};
use fracwave_core::{DofMap, Material, Mesh, MeshKind, ProblemKind};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const KINDS: [MeshKind; 2] = [MeshKind::Triangular, MeshKind::Quadrilateral];

#[test]
fn interpolant_energy_approaches_closed_form() {
    // V = sin(πx) sin(πy)(1, 1) with μ = λ = 1 has a(V, V) = 2π².
    let exact = 2.0 * PI * PI;
    let mat = Material::reference(0.5);
    for kind in KINDS {
        let mesh = Mesh::new(kind, 32).unwrap();
        let dofs = DofMap::dirichlet(&mesh);
        let a = a_form_matrix(&mesh, &dofs, &mat);
        let v = dofs.interpolate(&mesh, |x, y| ProblemKind::Ex61.value(x, y));
        let energy = a.quadratic_form(&v);
        assert!((energy - exact).abs() < 0.01 * exact, "{kind}: {energy} vs {exact}");
    }
}

#[test]
fn a_form_is_coercive_on_random_vectors() {
    let mut rng = StdRng::seed_from_u64(7);
    let mat = Material::reference(0.3);
    for kind in KINDS {
        let mesh = Mesh::new(kind, 8).unwrap();
        let dofs = DofMap::dirichlet(&mesh);
        let a = a_form_matrix(&mesh, &dofs, &mat);
        let m = assemble_mass(&mesh, &dofs);
        for _ in 0..20 {
            let x: Vec<f64> = (0..dofs.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            assert!(a.quadratic_form(&x) > 0.0);
            assert!(m.quadratic_form(&x) > 0.0);
        }
    }
}

#[test]
fn ritz_projection_is_galerkin_orthogonal() {
    let mat = Material::reference(0.5);
    let form = mat.a_form();
    let mut rng = StdRng::seed_from_u64(11);
    for kind in KINDS {
        for problem in [ProblemKind::Ex61, ProblemKind::Ex62] {
            let mesh = Mesh::new(kind, 12).unwrap();
            let dofs = DofMap::dirichlet(&mesh);
            let a = a_form_matrix(&mesh, &dofs, &mat);
            let r = ritz_project(&mesh, &dofs, &a, form, |x, y| problem.gradient(x, y)).unwrap();
            let rhs = assemble_vector(&mesh, &dofs, |x, y| ([0.0; 2], form.apply(symmetric_part(problem.gradient(x, y)))));
            let ar = a.mul_vec(&r);
            let scale = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
            for _ in 0..10 {
                let i = rng.gen_range(0..dofs.n_dofs());
                assert!((ar[i] - rhs[i]).abs() <= 1e-10 * scale, "{kind} {problem}: dof {i}");
            }
        }
    }
}

#[test]
fn ritz_projection_converges_at_second_order() {
    let mat = Material::reference(0.5);
    for kind in KINDS {
        let errors: Vec<f64> = [16, 32]
            .iter()
            .map(|&n| {
                let mesh = Mesh::new(kind, n).unwrap();
                let dofs = DofMap::dirichlet(&mesh);
                let a = a_form_matrix(&mesh, &dofs, &mat);
                let r = ritz_project(&mesh, &dofs, &a, mat.a_form(), |x, y| ProblemKind::Ex61.gradient(x, y)).unwrap();
                l2_error(&mesh, &dofs, &r, |x, y| ProblemKind::Ex61.value(x, y))
            })
            .collect();
        let ratio = errors[0] / errors[1];
        assert!((3.6..=4.4).contains(&ratio), "{kind}: {errors:?}");
    }
}

#[test]
fn element_types_converge_to_same_norm() {
    // ‖V‖² = 2 · (1/2)² for the sine field
    let exact = 0.5f64.sqrt();
    let norms: Vec<f64> = KINDS
        .iter()
        .map(|&kind| {
            let mesh = Mesh::new(kind, 32).unwrap();
            let dofs = DofMap::dirichlet(&mesh);
            let v = dofs.interpolate(&mesh, |x, y| ProblemKind::Ex61.value(x, y));
            let zero = vec![0.0; v.len()];
            let total = l2_error(&mesh, &dofs, &zero, |x, y| ProblemKind::Ex61.value(x, y));
            assert!((total - exact).abs() < 1e-10);
            assemble_mass(&mesh, &dofs).quadratic_form(&v).sqrt()
        })
        .collect();
    for n in &norms {
        assert!((n - exact).abs() < 2e-3, "{norms:?}");
    }
}

fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (a[i][i] - s).sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    x
}

#[test]
fn cg_matches_dense_cholesky() {
    let mut rng = StdRng::seed_from_u64(3);
    let n = 50;
    let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    let mut dense = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            dense[i][j] = (0..n).map(|k| g[i][k] * g[j][k]).sum::<f64>();
        }
        dense[i][i] += n as f64;
    }
    let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let expect = cholesky_solve(&dense, &b);
    let x = cg_solve(&CsrMatrix::from_dense(&dense), &b, &vec![0.0; n], 1e-14).unwrap();
    for (a, e) in x.iter().zip(&expect) {
        assert!((a - e).abs() < 1e-8);
    }
}

#[test]
fn mass_solve_recovers_constant_field() {
    let mesh = Mesh::new(MeshKind::Triangular, 10).unwrap();
    let dofs = DofMap::dirichlet(&mesh);
    let m = assemble_mass(&mesh, &dofs);
    let ones = vec![1.0; dofs.n_dofs()];
    let rhs = m.mul_vec(&ones);
    let mut x = vec![0.0; ones.len()];
    JacobiPcg::new(&m).solve(&m, &rhs, &mut x, 1e-13).unwrap();
    assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-10));
}
