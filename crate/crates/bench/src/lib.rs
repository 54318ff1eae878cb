//! Shared fixtures for the criterion benches.

use fracwave_core::fem::ritz_project;
use fracwave_core::stepper::{soe_for_run, SystemMatrices};
use fracwave_core::{DofMap, ManufacturedProblem, Mesh, MeshKind, ProblemKind, RunOptions, SoeApprox};

/// Everything a stepping benchmark needs for one mesh and step size.
pub struct Fixture {
    pub problem: ManufacturedProblem,
    pub mesh: Mesh,
    pub dofs: DofMap,
    pub sys: SystemMatrices,
    pub soe: SoeApprox,
    pub v0: Vec<f64>,
    pub dt: f64,
}

impl Fixture {
    pub fn new(kind: MeshKind, n: usize, alpha: f64, steps: usize) -> Self {
        let problem = ManufacturedProblem::new(ProblemKind::Ex61, alpha);
        let mesh = Mesh::new(kind, n).expect("mesh size");
        let dofs = DofMap::dirichlet(&mesh);
        let dt = problem.final_time / steps as f64;
        let sys = SystemMatrices::assemble(&mesh, &dofs, &problem.material, dt).expect("assembly");
        let soe = soe_for_run(&problem, dt, &RunOptions::default()).expect("soe");
        let mat = problem.material;
        let v0 = ritz_project(&mesh, &dofs, &sys.a_mat, mat.a_form(), |x, y| problem.gradient(x, y)).expect("ritz");
        Self { problem, mesh, dofs, sys, soe, v0, dt }
    }

    pub fn width(&self) -> usize {
        self.dofs.n_dofs()
    }
}

/// Deterministic pseudo-random vector in `[-1, 1)`.
pub fn test_vector(len: usize, seed: u64) -> Vec<f64> {
    let mut state = seed.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1);
    (0..len)
        .map(|_| {
            state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
            (state >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}
