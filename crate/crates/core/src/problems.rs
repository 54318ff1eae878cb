//! Manufactured solutions `v(x, t) = e^{−t} V(x)` and their loads.
//!
//! The load is defined through the weak identity so that the exact solution
//! satisfies it: with `g(t) = e^{−t}` and `I(t) = ∫_0^t β(t−s) g(s) ds`,
//! `⟨F(t), w⟩ = g'(t)⟨V, w⟩ + g(t) a(V, w) − I(t) b(V, w)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem::{assemble_vector, cell_points, l2_error, symmetric_part, DofMap, Material, QuadPoint, RuleOrder};
use crate::mesh::Mesh;
use crate::mlf::RelaxationKernel;
use crate::quad;
use crate::soe::SoeApprox;
use crate::stepper::MemoryState;

/// Absolute tolerance for `I(t)`.
pub const CONV_TOL: f64 = 1e-11;

type Mat2 = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    /// `V = sin(πx) sin(πy) (1, 1)`.
    Ex61,
    /// `V = (p(x) p'(y), p(y) p'(x))` with `p(s) = s⁴ − 2s³ + s²`.
    Ex62,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Ex61 => "ex61",
            ProblemKind::Ex62 => "ex62",
        }
    }

    pub fn value(self, x: f64, y: f64) -> [f64; 2] {
        match self {
            ProblemKind::Ex61 => {
                let s = (PI * x).sin() * (PI * y).sin();
                [s, s]
            }
            ProblemKind::Ex62 => [poly(x) * poly_d1(y), poly(y) * poly_d1(x)],
        }
    }

    /// `G[i][j] = ∂V_i/∂x_j`.
    pub fn gradient(self, x: f64, y: f64) -> Mat2 {
        match self {
            ProblemKind::Ex61 => {
                let (sx, cx) = (PI * x).sin_cos();
                let (sy, cy) = (PI * y).sin_cos();
                let gx = PI * cx * sy;
                let gy = PI * sx * cy;
                [[gx, gy], [gx, gy]]
            }
            ProblemKind::Ex62 => [
                [poly_d1(x) * poly_d1(y), poly(x) * poly_d2(y)],
                [poly(y) * poly_d2(x), poly_d1(y) * poly_d1(x)],
            ],
        }
    }
}

fn poly(s: f64) -> f64 {
    s * s * (s - 1.0) * (s - 1.0)
}

fn poly_d1(s: f64) -> f64 {
    2.0 * s * (s - 1.0) * (2.0 * s - 1.0)
}

fn poly_d2(s: f64) -> f64 {
    12.0 * s * s - 12.0 * s + 2.0
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ex61" => Ok(ProblemKind::Ex61),
            "ex62" => Ok(ProblemKind::Ex62),
            other => Err(Error::invalid(format!("unknown problem {other:?} (expected ex61 or ex62)"))),
        }
    }
}

/// A manufactured problem: the spatial profile, the material and `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedProblem {
    pub kind: ProblemKind,
    pub material: Material,
    pub final_time: f64,
}

impl ManufacturedProblem {
    /// Reference material with the given `α` and `T = 1`.
    pub fn new(kind: ProblemKind, alpha: f64) -> Self {
        Self { kind, material: Material::reference(alpha), final_time: 1.0 }
    }

    pub fn with_material(kind: ProblemKind, material: Material, final_time: f64) -> Result<Self> {
        material.validate()?;
        if !(final_time > 0.0 && final_time.is_finite()) {
            return Err(Error::invalid(format!("final time must be positive, got {final_time}")));
        }
        Ok(Self { kind, material, final_time })
    }

    pub fn value(&self, x: f64, y: f64) -> [f64; 2] {
        self.kind.value(x, y)
    }

    pub fn gradient(&self, x: f64, y: f64) -> Mat2 {
        self.kind.gradient(x, y)
    }

    pub fn g(&self, t: f64) -> f64 {
        (-t).exp()
    }

    pub fn g_prime(&self, t: f64) -> f64 {
        -(-t).exp()
    }

    pub fn exact(&self, x: f64, y: f64, t: f64) -> [f64; 2] {
        let g = self.g(t);
        let v = self.value(x, y);
        [g * v[0], g * v[1]]
    }
}

/// `∫_a^b f`, propagating the first kernel error out of the closure.
fn integrate_fallible<F: FnMut(f64) -> Result<f64>>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut failure = None;
    let value = quad::integrate(
        |u| match f(u) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        tol,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// `I(t) = ∫_0^t β(t − s) e^{−s} ds` by adaptive Gauss–Kronrod.
pub fn conv_factor(alpha: f64, tau_sigma: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("t must be nonnegative, got {t}")));
    }
    let kernel = RelaxationKernel::new(alpha, tau_sigma)?;
    integrate_fallible(|u| Ok(kernel.value(u)? * (u - t).exp()), 0.0, t, CONV_TOL)
}

/// `I(n Δt)` for `n = 0..=steps`, built with
/// `I(t + Δt) = e^{−Δt} I(t) + ∫_t^{t+Δt} β(u) e^{u − t − Δt} du`.
#[derive(Debug, Clone)]
pub struct ConvFactorTable {
    dt: f64,
    values: Vec<f64>,
}

impl ConvFactorTable {
    pub fn new(alpha: f64, tau_sigma: f64, dt: f64, steps: usize) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        let kernel = RelaxationKernel::new(alpha, tau_sigma)?;
        let decay = (-dt).exp();
        let tol = CONV_TOL / (steps.max(1) as f64).sqrt();
        let mut values = Vec::with_capacity(steps + 1);
        values.push(0.0);
        for n in 0..steps {
            let (a, b) = (n as f64 * dt, (n + 1) as f64 * dt);
            let piece = integrate_fallible(|u| Ok(kernel.value(u)? * (u - b).exp()), a, b, tol)?;
            values.push(decay * values[n] + piece);
        }
        Ok(Self { dt, values })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `I(n Δt)`.
    pub fn at_step(&self, n: usize) -> f64 {
        self.values[n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// The three fixed vectors the load is a combination of.
#[derive(Debug, Clone)]
pub struct LoadPrecomputation {
    pub p_mass: Vec<f64>,
    pub p_a: Vec<f64>,
    pub p_b: Vec<f64>,
}

impl LoadPrecomputation {
    pub fn new(mesh: &Mesh, dofs: &DofMap, problem: &ManufacturedProblem) -> Self {
        let kind = problem.kind;
        let a = problem.material.a_form();
        let b = problem.material.b_form();
        let zero = [[0.0; 2]; 2];
        Self {
            p_mass: assemble_vector(mesh, dofs, |x, y| (kind.value(x, y), zero)),
            p_a: assemble_vector(mesh, dofs, |x, y| ([0.0; 2], a.apply(symmetric_part(kind.gradient(x, y))))),
            p_b: assemble_vector(mesh, dofs, |x, y| ([0.0; 2], b.apply(symmetric_part(kind.gradient(x, y))))),
        }
    }

    /// Writes `g'(t) p_mass + g(t) p_a − I p_b` into `out`.
    pub fn load_into(&self, problem: &ManufacturedProblem, t: f64, conv: f64, out: &mut [f64]) {
        let (c_m, c_a) = (problem.g_prime(t), problem.g(t));
        for (k, o) in out.iter_mut().enumerate() {
            *o = c_m * self.p_mass[k] + c_a * self.p_a[k] - conv * self.p_b[k];
        }
    }
}

/// Load vector at time `t`, with `I(t)` evaluated directly.
pub fn assemble_load(pre: &LoadPrecomputation, problem: &ManufacturedProblem, t: f64) -> Result<Vec<f64>> {
    let mat = &problem.material;
    let conv = conv_factor(mat.alpha, mat.tau_sigma, t)?;
    let mut out = vec![0.0; pre.p_mass.len()];
    pre.load_into(problem, t, conv, &mut out);
    Ok(out)
}

/// `‖v_h − v(·, t)‖_{L²}`.
pub fn exact_error(mesh: &Mesh, dofs: &DofMap, coeffs: &[f64], problem: &ManufacturedProblem, t: f64) -> f64 {
    l2_error(mesh, dofs, coeffs, |x, y| problem.exact(x, y, t))
}

/// Strain `ε(v_h)` at a quadrature point, packed as `[xx, yy, xy]`.
fn strain_at(q: &QuadPoint, ids: &[usize], dofs: &DofMap, v: &[f64]) -> [f64; 3] {
    let mut grad = [[0.0; 2]; 2];
    for (a, &vert) in ids.iter().enumerate() {
        for (i, row) in grad.iter_mut().enumerate() {
            if let Some(d) = dofs.dof(vert, i) {
                row[0] += v[d] * q.grad[a][0];
                row[1] += v[d] * q.grad[a][1];
            }
        }
    }
    let e = symmetric_part(grad);
    [e[0][0], e[1][1], e[0][1]]
}

fn unpack(s: &[f64]) -> Mat2 {
    [[s[0], s[2]], [s[2], s[1]]]
}

/// Stress reconstruction at the degree-2 quadrature points:
/// `σ(t) = ℂε(v) − ∫_0^t β(t−s)(ℂ − (τ_ε/τ_σ)^α 𝔻)ε(v(s)) ds + β(t)(σ_0 − ℂε(u_0))`.
///
/// The history integral uses the same exponential recursion as the velocity
/// memory, applied to the strain values.
#[derive(Debug, Clone)]
pub struct StressRecorder {
    material: Material,
    kernel: RelaxationKernel,
    memory: MemoryState,
    points: Vec<(usize, QuadPoint)>,
    scratch: Vec<f64>,
}

impl StressRecorder {
    pub fn new(mesh: &Mesh, soe: &SoeApprox, material: &Material, dt: f64) -> Result<Self> {
        let mut points = Vec::new();
        let mut buf = Vec::new();
        for c in 0..mesh.n_cells() {
            cell_points(mesh, c, RuleOrder::Two, &mut buf);
            points.extend(buf.iter().map(|q| (c, *q)));
        }
        let width = 3 * points.len();
        Ok(Self {
            material: *material,
            kernel: RelaxationKernel::new(material.alpha, material.tau_sigma)?,
            memory: MemoryState::new(soe, material.tau_sigma, dt, width)?,
            points,
            scratch: vec![0.0; width],
        })
    }

    /// Quadrature point coordinates, in output order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().map(|(_, q)| (q.x, q.y))
    }

    fn fill_strain(&mut self, mesh: &Mesh, dofs: &DofMap, v: &[f64]) {
        for (k, (c, q)) in self.points.iter().enumerate() {
            let e = strain_at(q, mesh.cell(*c), dofs, v);
            self.scratch[3 * k..3 * k + 3].copy_from_slice(&e);
        }
    }

    /// Advances the strain memory by one step with the previous velocity.
    pub fn advance(&mut self, mesh: &Mesh, dofs: &DofMap, v_prev: &[f64]) {
        self.fill_strain(mesh, dofs, v_prev);
        self.memory.advance(&self.scratch);
    }

    /// Stress at every quadrature point. `mismatch(x, y)` is `σ_0 − ℂε(u_0)`.
    pub fn evaluate<F>(&mut self, mesh: &Mesh, dofs: &DofMap, v: &[f64], t: f64, mismatch: F) -> Result<Vec<Mat2>>
    where
        F: Fn(f64, f64) -> Mat2,
    {
        self.fill_strain(mesh, dofs, v);
        let beta = self.kernel.value(t)?;
        let c = self.material.c_tensor();
        let relaxed = self.material.relaxed_tensor();
        let hist = self.memory.sum();
        let mut out = Vec::with_capacity(self.points.len());
        for (k, (_, q)) in self.points.iter().enumerate() {
            let inst = c.apply(unpack(&self.scratch[3 * k..3 * k + 3]));
            let mem = relaxed.apply(unpack(&hist[3 * k..3 * k + 3]));
            let iota = mismatch(q.x, q.y);
            let mut s = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    s[i][j] = inst[i][j] - mem[i][j] + beta * iota[i][j];
                }
            }
            out.push(s);
        }
        Ok(out)
    }
}
