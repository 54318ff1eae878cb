//! Backward Euler time stepping for
//! `⟨v_t, w⟩ + a(v, w) − ∫_0^t β(t − s) b(v(s), w) ds = ⟨F, w⟩`.
//!
//! Three treatments of the history integral share one solve per step with
//! the constant matrix `M/Δt + A`:
//!
//! * [`Scheme::Fast`] keeps one memory vector per exponential of the SOE
//!   approximation and advances them with a two-term recursion.
//! * [`Scheme::Theta`] stores every past velocity and forms the convolution
//!   with the lag weights `θ_k` of the same SOE. It is algebraically equal to
//!   the fast scheme and exists to check it.
//! * [`Scheme::Direct`] stores every past velocity and weights it with the
//!   exact kernel integral over each lag interval.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::fem::{a_form_matrix, assemble_mass, b_form_matrix, ritz_project, CgOutcome, CsrMatrix, DofMap, JacobiPcg, Material};
use crate::mesh::Mesh;
use crate::mlf::RelaxationKernel;
use crate::problems::{exact_error, ConvFactorTable, LoadPrecomputation, ManufacturedProblem, StressRecorder};
use crate::soe::{build_soe, SoeApprox};

/// Default relative residual for the per-step solves.
pub const DEFAULT_CG_TOL: f64 = 1e-10;

/// Default SOE panel ratio.
pub const DEFAULT_Q: f64 = 10.0;

/// The memory variables `H_j`, stored contiguously (`n_exp × width`), and
/// their running sum `Σ_j H_j`.
#[derive(Debug, Clone)]
pub struct MemoryState {
    width: usize,
    h: Vec<f64>,
    decay: Vec<f64>,
    gain: Vec<f64>,
    sum: Vec<f64>,
}

impl MemoryState {
    /// Zero memory for vectors of length `width`, with
    /// `decay_j = e^{−a_j Δt/τ_σ}` and `gain_j = (b_j τ_σ/a_j)(1 − decay_j)`.
    pub fn new(soe: &SoeApprox, tau_sigma: f64, dt: f64, width: usize) -> Result<Self> {
        if !(dt > 0.0) || !(tau_sigma > 0.0) {
            return Err(Error::invalid(format!("dt and tau_sigma must be positive, got {dt} and {tau_sigma}")));
        }
        let mut decay = Vec::with_capacity(soe.n_exp());
        let mut gain = Vec::with_capacity(soe.n_exp());
        for (&a, &b) in soe.nodes().iter().zip(soe.weights()) {
            let x = -a * dt / tau_sigma;
            decay.push(x.exp());
            gain.push(-b * tau_sigma / a * x.exp_m1());
        }
        Ok(Self {
            width,
            h: vec![0.0; soe.n_exp() * width],
            decay,
            gain,
            sum: vec![0.0; width],
        })
    }

    pub fn n_exp(&self) -> usize {
        self.decay.len()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn decay(&self) -> &[f64] {
        &self.decay
    }

    pub fn gain(&self) -> &[f64] {
        &self.gain
    }

    pub fn h(&self, j: usize) -> &[f64] {
        &self.h[j * self.width..(j + 1) * self.width]
    }

    /// `Σ_j H_j` as of the last [`advance`](Self::advance).
    pub fn sum(&self) -> &[f64] {
        &self.sum
    }

    /// Bytes held by the memory vectors.
    pub fn history_bytes(&self) -> usize {
        self.h.len() * std::mem::size_of::<f64>()
    }

    /// `H_j ← decay_j H_j + gain_j v_prev` for every `j`, refreshing the sum.
    pub fn advance(&mut self, v_prev: &[f64]) {
        assert_eq!(v_prev.len(), self.width, "memory width mismatch");
        self.sum.fill(0.0);
        for (j, h) in self.h.chunks_exact_mut(self.width.max(1)).enumerate() {
            let (d, g) = (self.decay[j], self.gain[j]);
            for ((hk, &vk), sk) in h.iter_mut().zip(v_prev).zip(self.sum.iter_mut()) {
                *hk = d * *hk + g * vk;
                *sk += *hk;
            }
        }
    }
}

pub fn advance_memory(state: &mut MemoryState, v_prev: &[f64]) {
    state.advance(v_prev);
}

/// `θ_i = Σ_j (b_j τ_σ/a_j)(e^{−(i−1)Δt a_j/τ_σ} − e^{−iΔt a_j/τ_σ})` for `i = 1..=count`.
pub fn theta_weights(soe: &SoeApprox, tau_sigma: f64, dt: f64, count: usize) -> Vec<f64> {
    (1..=count)
        .map(|i| {
            soe.nodes()
                .iter()
                .zip(soe.weights())
                .map(|(&a, &b)| {
                    let x = a * dt / tau_sigma;
                    -b * tau_sigma / a * (-(i as f64 - 1.0) * x).exp() * (-x).exp_m1()
                })
                .sum()
        })
        .collect()
}

/// `w_k = ∫_{(k−1)Δt}^{kΔt} β(s) ds` for `k = 1..=count`.
pub fn direct_weights(kernel: &RelaxationKernel, dt: f64, count: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let mut prev = 0.0;
    for k in 1..=count {
        let p = kernel.antiderivative(k as f64 * dt)?;
        out.push(p - prev);
        prev = p;
    }
    Ok(out)
}

/// Every past velocity `v⁰ … v^{n−1}`, stored contiguously.
#[derive(Debug, Clone)]
pub struct HistoryStore {
    width: usize,
    data: Vec<f64>,
    peak_bytes: usize,
}

impl HistoryStore {
    pub fn new(width: usize) -> Self {
        Self { width, data: Vec::new(), peak_bytes: 0 }
    }

    pub fn with_capacity(width: usize, steps: usize) -> Self {
        Self { width, data: Vec::with_capacity(width * steps), peak_bytes: 0 }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.width.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn push(&mut self, v: &[f64]) {
        assert_eq!(v.len(), self.width, "history width mismatch");
        self.data.extend_from_slice(v);
        self.peak_bytes = self.peak_bytes.max(self.history_bytes());
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    /// Bytes of stored velocities.
    pub fn history_bytes(&self) -> usize {
        self.data.len() * std::mem::size_of::<f64>()
    }

    pub fn peak_bytes(&self) -> usize {
        self.peak_bytes
    }

    /// `out = Σ_{i<n} lag_weights[n − i − 1] v^i` with `n = self.len()`.
    pub fn convolve(&self, lag_weights: &[f64], out: &mut [f64]) {
        let n = self.len();
        assert!(lag_weights.len() >= n, "not enough lag weights");
        out.fill(0.0);
        for (i, v) in self.data.chunks_exact(self.width.max(1)).enumerate() {
            let w = lag_weights[n - i - 1];
            for (o, &x) in out.iter_mut().zip(v) {
                *o += w * x;
            }
        }
    }
}

/// `M`, `A`, `B` and the step matrix `S = M/Δt + A`.
#[derive(Debug, Clone)]
pub struct SystemMatrices {
    pub mass: CsrMatrix,
    pub a_mat: CsrMatrix,
    pub b_mat: CsrMatrix,
    pub system: CsrMatrix,
    pub dt: f64,
}

impl SystemMatrices {
    pub fn assemble(mesh: &Mesh, dofs: &DofMap, material: &Material, dt: f64) -> Result<Self> {
        Self::from_parts(assemble_mass(mesh, dofs), a_form_matrix(mesh, dofs, material), b_form_matrix(mesh, dofs, material), dt)
    }

    pub fn from_parts(mass: CsrMatrix, a_mat: CsrMatrix, b_mat: CsrMatrix, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        let system = mass.combine(1.0 / dt, &a_mat, 1.0)?;
        Ok(Self { mass, a_mat, b_mat, system, dt })
    }
}

/// Preconditioned CG on the step matrix with reusable buffers.
#[derive(Debug, Clone)]
pub struct LinearSolver {
    pcg: JacobiPcg,
    rhs: Vec<f64>,
    tol: f64,
    iterations: usize,
}

impl LinearSolver {
    pub fn new(sys: &SystemMatrices, tol: f64) -> Self {
        Self { pcg: JacobiPcg::new(&sys.system), rhs: vec![0.0; sys.system.dim()], tol, iterations: 0 }
    }

    /// Total CG iterations so far.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Solves `S vⁿ = M v^{n−1}/Δt + B·hist + load`, warm-started from `v^{n−1}`.
    pub fn step(&mut self, sys: &SystemMatrices, v_prev: &[f64], hist: &[f64], load: &[f64]) -> Result<Vec<f64>> {
        self.rhs.copy_from_slice(load);
        sys.mass.matvec_add(1.0 / sys.dt, v_prev, &mut self.rhs);
        sys.b_mat.matvec_add(1.0, hist, &mut self.rhs);
        let mut v = v_prev.to_vec();
        let CgOutcome { iterations, .. } = self.pcg.solve(&sys.system, &self.rhs, &mut v, self.tol)?;
        self.iterations += iterations;
        Ok(v)
    }
}

/// One fast step; `mem` must already hold `H_j(vⁿ)`.
pub fn step_fast(sys: &SystemMatrices, mem: &MemoryState, v_prev: &[f64], load: &[f64], solver: &mut LinearSolver) -> Result<Vec<f64>> {
    solver.step(sys, v_prev, mem.sum(), load)
}

/// One convolution step over the stored history with lag weights
/// (`weights[k − 1]` multiplies the velocity `k` steps back).
pub fn step_direct(
    sys: &SystemMatrices,
    history: &HistoryStore,
    weights: &[f64],
    load: &[f64],
    solver: &mut LinearSolver,
) -> Result<Vec<f64>> {
    let n = history.len();
    if n == 0 {
        return Err(Error::invalid("direct step needs at least the initial velocity"));
    }
    let mut conv = vec![0.0; history.width];
    history.convolve(weights, &mut conv);
    solver.step(sys, history.get(n - 1), &conv, load)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Fast,
    Direct,
    Theta,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Fast => "fast",
            Scheme::Direct => "direct",
            Scheme::Theta => "theta",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fast" => Ok(Scheme::Fast),
            "direct" => Ok(Scheme::Direct),
            "theta" => Ok(Scheme::Theta),
            other => Err(Error::invalid(format!("unknown scheme {other:?} (expected fast, direct or theta)"))),
        }
    }
}

/// SOE tolerance as a function of the step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsRule {
    /// `ε = Δt/10`.
    DtOver10,
    Fixed(f64),
}

impl EpsRule {
    pub fn eps(self, dt: f64) -> f64 {
        match self {
            EpsRule::DtOver10 => dt / 10.0,
            EpsRule::Fixed(e) => e,
        }
    }
}

impl fmt::Display for EpsRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsRule::DtOver10 => f.write_str("dt-over-10"),
            EpsRule::Fixed(e) => write!(f, "fixed:{e}"),
        }
    }
}

impl FromStr for EpsRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("dt-over-10") {
            return Ok(EpsRule::DtOver10);
        }
        if let Some(v) = s.strip_prefix("fixed:") {
            let e: f64 = v.trim().parse().map_err(|_| Error::invalid(format!("bad eps value {v:?}")))?;
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::invalid(format!("eps must lie in (0, 1), got {e}")));
            }
            return Ok(EpsRule::Fixed(e));
        }
        Err(Error::invalid(format!("unknown eps rule {s:?} (expected dt-over-10 or fixed:F)")))
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub q: f64,
    pub eps_rule: EpsRule,
    pub cg_tol: f64,
    /// Use this approximation instead of building one for the run's `Δt`.
    pub soe: Option<SoeApprox>,
    /// Reconstruct the stress at the final time (with `σ_0 = ℂε(u_0)`).
    pub record_stress: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { q: DEFAULT_Q, eps_rule: EpsRule::DtOver10, cg_tol: DEFAULT_CG_TOL, soe: None, record_stress: false }
    }
}

/// Wall-clock breakdown of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Timings {
    /// Assembly, projection, SOE construction and weight tables.
    pub setup: Duration,
    /// Memory updates or history convolutions.
    pub history: Duration,
    /// Right-hand sides and linear solves.
    pub solve: Duration,
    pub total: Duration,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub scheme: Scheme,
    pub n_steps: usize,
    pub dt: f64,
    pub velocity: Vec<f64>,
    /// `‖v_h(T) − v(T)‖_{L²}`.
    pub error: f64,
    /// Exponentials in use, zero for the direct scheme.
    pub n_exp: usize,
    pub timings: Timings,
    pub peak_history_bytes: usize,
    pub cg_iterations: usize,
    pub stress: Option<Vec<[[f64; 2]; 2]>>,
}

/// SOE for a run with step `dt`, certified on `[Δt/(10τ_σ), T/τ_σ]`.
pub fn soe_for_run(problem: &ManufacturedProblem, dt: f64, opts: &RunOptions) -> Result<SoeApprox> {
    if let Some(s) = &opts.soe {
        return Ok(s.clone());
    }
    let mat = &problem.material;
    if mat.alpha == 1.0 {
        return SoeApprox::from_terms(1.0, vec![1.0], vec![1.0]);
    }
    let t_min = dt / (10.0 * mat.tau_sigma);
    let t_max = (problem.final_time / mat.tau_sigma).max(2.0 * t_min);
    build_soe(mat.alpha, opts.eps_rule.eps(dt), opts.q, t_min, t_max)
}

/// Integrates the manufactured problem to `T` in `n_steps` uniform steps
/// from the Ritz projection of `v(·, 0)` and reports the final error.
pub fn run(problem: &ManufacturedProblem, mesh: &Mesh, scheme: Scheme, n_steps: usize, opts: &RunOptions) -> Result<RunOutcome> {
    let start = Instant::now();
    let mat = problem.material;
    mat.validate()?;
    let dofs = DofMap::dirichlet(mesh);
    let width = dofs.n_dofs();
    let dt = problem.final_time / n_steps.max(1) as f64;
    let sys = SystemMatrices::assemble(mesh, &dofs, &mat, dt)?;
    let kind = problem.kind;
    let v0 = ritz_project(mesh, &dofs, &sys.a_mat, mat.a_form(), |x, y| kind.gradient(x, y))?;

    let needs_soe = scheme != Scheme::Direct || opts.record_stress;
    let soe = if needs_soe && n_steps > 0 { Some(soe_for_run(problem, dt, opts)?) } else { None };
    let pre = LoadPrecomputation::new(mesh, &dofs, problem);
    let conv = ConvFactorTable::new(mat.alpha, mat.tau_sigma, dt, n_steps)?;
    let lag_weights = match (scheme, &soe) {
        (Scheme::Theta, Some(s)) => theta_weights(s, mat.tau_sigma, dt, n_steps),
        (Scheme::Direct, _) => direct_weights(&RelaxationKernel::new(mat.alpha, mat.tau_sigma)?, dt, n_steps)?,
        _ => Vec::new(),
    };
    let mut stress = match (&soe, opts.record_stress) {
        (Some(s), true) => Some(StressRecorder::new(mesh, s, &mat, dt)?),
        _ => None,
    };
    let mut solver = LinearSolver::new(&sys, opts.cg_tol);
    let mut timings = Timings { setup: start.elapsed(), ..Timings::default() };

    let mut load = vec![0.0; width];
    let mut hist = vec![0.0; width];
    let mut v = v0;
    let mut memory = match (scheme, &soe) {
        (Scheme::Fast, Some(s)) => Some(MemoryState::new(s, mat.tau_sigma, dt, width)?),
        _ => None,
    };
    let mut store = match scheme {
        Scheme::Fast => None,
        _ => Some(HistoryStore::with_capacity(width, n_steps)),
    };
    for n in 1..=n_steps {
        let t = n as f64 * dt;
        let clock = Instant::now();
        if let Some(mem) = memory.as_mut() {
            mem.advance(&v);
            hist.copy_from_slice(mem.sum());
        }
        if let Some(st) = store.as_mut() {
            st.push(&v);
            st.convolve(&lag_weights, &mut hist);
        }
        timings.history += clock.elapsed();

        if let Some(rec) = stress.as_mut() {
            rec.advance(mesh, &dofs, &v);
        }
        let clock = Instant::now();
        pre.load_into(problem, t, conv.at_step(n), &mut load);
        v = solver.step(&sys, &v, &hist, &load)?;
        timings.solve += clock.elapsed();
    }

    let t_end = n_steps as f64 * dt;
    let stress = match stress.as_mut() {
        Some(rec) => Some(rec.evaluate(mesh, &dofs, &v, t_end, |_, _| [[0.0; 2]; 2])?),
        None => None,
    };
    let error = exact_error(mesh, &dofs, &v, problem, t_end);
    let peak_history_bytes = match (&memory, &store) {
        (Some(m), _) => m.history_bytes(),
        (_, Some(s)) => s.peak_bytes(),
        _ => 0,
    };
    timings.total = start.elapsed();
    Ok(RunOutcome {
        scheme,
        n_steps,
        dt,
        velocity: v,
        error,
        n_exp: if scheme == Scheme::Direct { 0 } else { soe.as_ref().map_or(0, SoeApprox::n_exp) },
        timings,
        peak_history_bytes,
        cg_iterations: solver.iterations(),
        stress,
    })
}
