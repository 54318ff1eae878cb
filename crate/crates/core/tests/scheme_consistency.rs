use fracwave_core::fem::{a_form_matrix, assemble_mass, b_form_matrix, ritz_project, JacobiPcg};
use fracwave_core::problems::{assemble_load, conv_factor, LoadPrecomputation};
use fracwave_core::stepper::{run, EpsRule, RunOptions, Scheme};
use fracwave_core::{DofMap, ManufacturedProblem, Mesh, MeshKind, ProblemKind};

fn l2_diff(mesh: &Mesh, a: &[f64], b: &[f64]) -> f64 {
    let dofs = DofMap::dirichlet(mesh);
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    assemble_mass(mesh, &dofs).quadratic_form(&d).sqrt()
}

fn fast_vs_direct(eps: f64) -> f64 {
    let problem = ManufacturedProblem::new(ProblemKind::Ex61, 0.5);
    let mesh = Mesh::new(MeshKind::Quadrilateral, 16).unwrap();
    let opts = RunOptions { eps_rule: EpsRule::Fixed(eps), cg_tol: 1e-13, ..RunOptions::default() };
    let fast = run(&problem, &mesh, Scheme::Fast, 64, &opts).unwrap();
    let direct = run(&problem, &mesh, Scheme::Direct, 64, &opts).unwrap();
    assert_eq!(direct.n_exp, 0);
    assert!(fast.n_exp > 0);
    l2_diff(&mesh, &fast.velocity, &direct.velocity)
}

#[test]
fn fast_tracks_direct_at_tight_tolerance() {
    assert!(fast_vs_direct(1e-8) <= 1e-5);
}

#[test]
fn fast_direct_gap_shrinks_with_eps() {
    let loose = fast_vs_direct(1e-4);
    let tight = fast_vs_direct(1e-10);
    assert!(tight <= 1e-6, "{tight}");
    assert!(tight < loose, "{tight} vs {loose}");
}

#[test]
fn spatial_refinement_reduces_error_fourfold() {
    let problem = ManufacturedProblem::new(ProblemKind::Ex61, 0.5);
    let errors: Vec<f64> = [8, 16]
        .iter()
        .map(|&n| {
            let mesh = Mesh::new(MeshKind::Quadrilateral, n).unwrap();
            let steps = n * n;
            run(&problem, &mesh, Scheme::Fast, steps, &RunOptions::default()).unwrap().error
        })
        .collect();
    let ratio = errors[0] / errors[1];
    assert!((3.4..=4.6).contains(&ratio), "{errors:?}");
}

#[test]
fn fast_history_memory_independent_of_steps() {
    let problem = ManufacturedProblem::new(ProblemKind::Ex62, 0.5);
    let mesh = Mesh::new(MeshKind::Triangular, 6).unwrap();
    let soe = fracwave_core::stepper::soe_for_run(&problem, 1.0 / 40.0, &RunOptions::default()).unwrap();
    let opts = RunOptions { soe: Some(soe), ..RunOptions::default() };
    let short = run(&problem, &mesh, Scheme::Fast, 20, &opts).unwrap();
    let long = run(&problem, &mesh, Scheme::Fast, 40, &opts).unwrap();
    assert_eq!(short.peak_history_bytes, long.peak_history_bytes);
    let dofs = DofMap::dirichlet(&mesh).n_dofs();
    assert_eq!(long.peak_history_bytes, long.n_exp * dofs * 8);

    let d20 = run(&problem, &mesh, Scheme::Direct, 20, &opts).unwrap();
    let d40 = run(&problem, &mesh, Scheme::Direct, 40, &opts).unwrap();
    assert_eq!(d40.peak_history_bytes, 2 * d20.peak_history_bytes);
}

/// Weak residual of the exact solution's Ritz projection, measured in the
/// discrete dual norm `(rᵀ M⁻¹ r)^{1/2}`.
fn ritz_residual(n: usize, t: f64) -> f64 {
    let problem = ManufacturedProblem::new(ProblemKind::Ex61, 0.5);
    let mat = problem.material;
    let mesh = Mesh::new(MeshKind::Quadrilateral, n).unwrap();
    let dofs = DofMap::dirichlet(&mesh);
    let m = assemble_mass(&mesh, &dofs);
    let a = a_form_matrix(&mesh, &dofs, &mat);
    let b = b_form_matrix(&mesh, &dofs, &mat);
    let rv = ritz_project(&mesh, &dofs, &a, mat.a_form(), |x, y| problem.gradient(x, y)).unwrap();
    let pre = LoadPrecomputation::new(&mesh, &dofs, &problem);
    let load = assemble_load(&pre, &problem, t).unwrap();
    let conv = conv_factor(mat.alpha, mat.tau_sigma, t).unwrap();
    let (mv, av, bv) = (m.mul_vec(&rv), a.mul_vec(&rv), b.mul_vec(&rv));
    let r: Vec<f64> = (0..rv.len())
        .map(|i| problem.g_prime(t) * mv[i] + problem.g(t) * av[i] - conv * bv[i] - load[i])
        .collect();
    let mut z = vec![0.0; r.len()];
    JacobiPcg::new(&m).solve(&m, &r, &mut z, 1e-12).unwrap();
    r.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>().sqrt()
}

#[test]
fn load_is_consistent_with_ritz_projection() {
    let res: Vec<f64> = [8, 16, 32].iter().map(|&n| ritz_residual(n, 0.6)).collect();
    for w in res.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 1.7, "{res:?}");
    }
}

#[test]
fn load_is_separable_in_time() {
    let problem = ManufacturedProblem::new(ProblemKind::Ex62, 0.3);
    let mesh = Mesh::new(MeshKind::Triangular, 6).unwrap();
    let dofs = DofMap::dirichlet(&mesh);
    let pre = LoadPrecomputation::new(&mesh, &dofs, &problem);
    let times = [0.2, 0.5, 0.9];
    let loads: Vec<Vec<f64>> = times.iter().map(|&t| assemble_load(&pre, &problem, t).unwrap()).collect();
    let mat = problem.material;
    let coef = |t: f64| [problem.g_prime(t), problem.g(t), -conv_factor(mat.alpha, mat.tau_sigma, t).unwrap()];
    for (k, &t) in times.iter().enumerate() {
        let c = coef(t);
        for i in 0..dofs.n_dofs() {
            let expect = c[0] * pre.p_mass[i] + c[1] * pre.p_a[i] + c[2] * pre.p_b[i];
            assert!((loads[k][i] - expect).abs() <= 1e-14 * (1.0 + expect.abs()));
        }
    }
}
