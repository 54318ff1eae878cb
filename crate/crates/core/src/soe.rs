//! Sum-of-exponentials compression of `E_α(−t^α)`.
//!
//! With `x = s^{−α}` the kernel becomes `∫_0^∞ f(x, t) dx` where
//!
//! ```text
//! f(x, t) = sin(απ)/(απ) · e^{−t x^{−1/α}} / (x² + 2x cos απ + 1).
//! ```
//!
//! The range is cut into dyadic panels `[q^{k−1}, q^k]`, each integrated with
//! a `J`-point Gauss–Legendre rule, and the tail beyond `q^K` is dropped.
//! Every Gauss node becomes one exponential `b e^{−a t}` with
//! `a = x^{−1/α}` and `b` the scaled quadrature weight.
//!
//! Near `x = 0` the integrand switches on at `x ≈ t^α`, which a single
//! `[0, 1]` panel resolves poorly for small `t`. [`build_soe`] therefore
//! splits that first panel geometrically toward zero (`refine_levels`
//! sub-panels), sized from the smallest time that must be certified.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mlf;

/// Hard cap on the number of exponentials produced by [`build_soe`].
pub const MAX_N_EXP: usize = 4096;
/// Grid size used by [`build_soe`] to certify a candidate.
pub const CERT_SAMPLES: usize = 1000;
const J_START: usize = 8;
const J_STEP: usize = 4;
const J_MAX: usize = 48;
const K_STEP: usize = 2;

/// One integration panel `[c − r, c + r]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub c: f64,
    pub r: f64,
}

impl Panel {
    pub fn lower(&self) -> f64 {
        self.c - self.r
    }

    pub fn upper(&self) -> f64 {
        self.c + self.r
    }
}

fn check_ratio(q: f64) -> Result<()> {
    if q > 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("panel ratio q must exceed 1, got {q}")))
    }
}

/// Panels `[0, 1], [1, q], …, [q^{K−1}, q^K]`.
pub fn build_panels(q: f64, big_k: usize) -> Result<Vec<Panel>> {
    build_panels_refined(q, big_k, 0)
}

/// Like [`build_panels`] but with `[0, 1]` replaced by
/// `[0, q^{−m}], [q^{−m}, q^{−m+1}], …, [q^{−1}, 1]`.
pub fn build_panels_refined(q: f64, big_k: usize, refine_levels: usize) -> Result<Vec<Panel>> {
    check_ratio(q)?;
    let mut panels = Vec::with_capacity(big_k + 1 + refine_levels);
    if refine_levels == 0 {
        panels.push(Panel { c: 0.5, r: 0.5 });
    } else {
        let first = q.powi(-(refine_levels as i32));
        panels.push(Panel { c: 0.5 * first, r: 0.5 * first });
        for i in (1..=refine_levels as i32).rev() {
            let lo = q.powi(-i);
            let hi = q.powi(-i + 1);
            panels.push(Panel { c: 0.5 * (hi + lo), r: 0.5 * (hi - lo) });
        }
    }
    for k in 1..=big_k as i32 {
        let base = q.powi(k - 1);
        panels.push(Panel { c: 0.5 * (q + 1.0) * base, r: 0.5 * (q - 1.0) * base });
    }
    if panels.iter().any(|p| !p.upper().is_finite()) {
        return Err(Error::invalid(format!("q^K overflows for q = {q}, K = {big_k}")));
    }
    Ok(panels)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre nodes (ascending) and weights on `[−1, 1]`, `1 ≤ j ≤ 64`.
pub fn gauss_legendre(j: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=64).contains(&j) {
        return Err(Error::invalid(format!("Gauss-Legendre order must be in 1..=64, got {j}")));
    }
    if j == 1 {
        return Ok((vec![0.0], vec![2.0]));
    }
    let mut nodes = vec![0.0; j];
    let mut weights = vec![0.0; j];
    let jf = j as f64;
    for i in 0..j.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (jf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(j, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(j, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Newton from the Chebyshev guess walks roots from +1 downward.
        nodes[j - 1 - i] = x;
        nodes[i] = -x;
        weights[j - 1 - i] = w;
        weights[i] = w;
    }
    if j % 2 == 1 {
        nodes[j / 2] = 0.0;
    }
    Ok((nodes, weights))
}

/// Exponential-sum approximation `E_α(−t^α) ≈ Σ b_j e^{−a_j t}` in normalized
/// time `t` (physical time divided by `τ_σ`).
#[derive(Debug, Clone, PartialEq)]
pub struct SoeApprox {
    alpha: f64,
    q: f64,
    big_k: usize,
    j_per_panel: usize,
    refine_levels: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    eps_target: f64,
    eps_certified: f64,
    range: (f64, f64),
}

impl SoeApprox {
    /// Uncertified approximation from the panel construction.
    pub fn from_panels(alpha: f64, q: f64, big_k: usize, j_per_panel: usize, refine_levels: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid(format!("SOE requires 0 < alpha < 1, got {alpha}")));
        }
        let panels = build_panels_refined(q, big_k, refine_levels)?;
        let (xi, omega) = gauss_legendre(j_per_panel)?;
        let scale = (alpha * PI).sin() / (alpha * PI);
        let cs = (alpha * PI).cos();
        let mut nodes = Vec::with_capacity(panels.len() * j_per_panel);
        let mut weights = Vec::with_capacity(panels.len() * j_per_panel);
        for p in &panels {
            for (&y, &w) in xi.iter().zip(&omega) {
                let x = p.r * y + p.c;
                nodes.push(x.powf(-1.0 / alpha));
                weights.push(scale * w * p.r / (x * x + 2.0 * x * cs + 1.0));
            }
        }
        let soe = Self {
            alpha,
            q,
            big_k,
            j_per_panel,
            refine_levels,
            nodes,
            weights,
            eps_target: f64::NAN,
            eps_certified: f64::INFINITY,
            range: (f64::NAN, f64::NAN),
        };
        soe.check_terms()?;
        Ok(soe)
    }

    /// Arbitrary positive exponential sum, e.g. for tests or a table read back from disk.
    pub fn from_terms(alpha: f64, nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::invalid("nodes and weights must be nonempty and of equal length"));
        }
        let soe = Self {
            alpha,
            q: f64::NAN,
            big_k: 0,
            j_per_panel: nodes.len(),
            refine_levels: 0,
            nodes,
            weights,
            eps_target: f64::NAN,
            eps_certified: f64::INFINITY,
            range: (f64::NAN, f64::NAN),
        };
        soe.check_terms()?;
        Ok(soe)
    }

    fn check_terms(&self) -> Result<()> {
        let bad = self
            .nodes
            .iter()
            .chain(&self.weights)
            .any(|v| !(v.is_finite() && *v > 0.0));
        if bad {
            return Err(Error::invalid("SOE rates and weights must be finite and positive"));
        }
        Ok(())
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn big_k(&self) -> usize {
        self.big_k
    }
    pub fn j_per_panel(&self) -> usize {
        self.j_per_panel
    }
    pub fn refine_levels(&self) -> usize {
        self.refine_levels
    }
    /// Rates `a_j`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
    /// Amplitudes `b_j`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn n_exp(&self) -> usize {
        self.nodes.len()
    }
    pub fn eps_target(&self) -> f64 {
        self.eps_target
    }
    /// Measured max deviation on the certified range; `∞` until certified.
    pub fn eps_certified(&self) -> f64 {
        self.eps_certified
    }
    /// Normalized time range the certificate covers.
    pub fn certified_range(&self) -> (f64, f64) {
        self.range
    }

    /// `Σ b_j e^{−a_j t}` at normalized time `t`.
    pub fn eval(&self, t: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(a, b)| b * (-a * t).exp())
            .sum()
    }

    /// Kernel `β(t) = E_α(−(t/τ_σ)^α)` at physical time `t`.
    pub fn eval_scaled(&self, t: f64, tau_sigma: f64) -> f64 {
        self.eval(t / tau_sigma)
    }

    /// One `a_j b_j` pair per line, 17 significant digits.
    pub fn to_table(&self) -> String {
        let mut out = String::with_capacity(self.n_exp() * 50);
        for (a, b) in self.nodes.iter().zip(&self.weights) {
            out.push_str(&format!("{a:.16e} {b:.16e}\n"));
        }
        out
    }
}

/// Parses the output of [`SoeApprox::to_table`]; blank lines and `#` comments are skipped.
pub fn parse_table(text: &str) -> Result<Vec<(f64, f64)>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| {
            let mut it = line.split_whitespace().map(str::parse::<f64>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
                _ => Err(Error::invalid(format!("malformed SOE table line: {line:?}"))),
            }
        })
        .collect()
}

pub fn eval_soe(soe: &SoeApprox, t: f64) -> f64 {
    soe.eval(t)
}

/// Reference kernel values on a log-spaced grid, reused across candidates.
struct Certifier {
    times: Vec<f64>,
    reference: Vec<f64>,
}

impl Certifier {
    fn new(alpha: f64, t_min: f64, t_max: f64, samples: usize) -> Result<Self> {
        if samples < 100 {
            return Err(Error::invalid(format!("certification needs at least 100 samples, got {samples}")));
        }
        if !(t_min > 0.0 && t_max > t_min) {
            return Err(Error::invalid(format!("invalid certification range [{t_min}, {t_max}]")));
        }
        let (l0, l1) = (t_min.ln(), t_max.ln());
        let times: Vec<f64> = (0..samples)
            .map(|i| (l0 + (l1 - l0) * i as f64 / (samples - 1) as f64).exp())
            .collect();
        let reference = times
            .iter()
            .map(|&t| mlf::ml_integral(alpha, t))
            .collect::<Result<_>>()?;
        Ok(Self { times, reference })
    }

    fn max_deviation(&self, soe: &SoeApprox) -> f64 {
        self.times
            .iter()
            .zip(&self.reference)
            .map(|(&t, &r)| (soe.eval(t) - r).abs())
            .fold(0.0, f64::max)
    }
}

/// Max deviation from the reference Mittag-Leffler values over a log-spaced
/// grid of `samples` points on `[t_min, t_max]`; the result is stored in
/// the approximation as its certificate.
pub fn certify_soe(soe: &mut SoeApprox, t_min: f64, t_max: f64, samples: usize) -> Result<f64> {
    let cert = Certifier::new(soe.alpha, t_min, t_max, samples)?;
    let dev = cert.max_deviation(soe);
    soe.eps_certified = dev;
    soe.range = (t_min, t_max);
    Ok(dev)
}

/// Number of geometric sub-panels needed in `[0, 1]` so the switch-on point
/// `x ≈ t_min^α` sits inside a panel of bounded aspect ratio.
pub fn refine_levels_for(alpha: f64, q: f64, t_min: f64) -> usize {
    if t_min >= 1.0 {
        0
    } else {
        (alpha * (1.0 / t_min).ln() / q.ln()).ceil().max(0.0) as usize
    }
}

/// Builds an approximation certified to `eps` on `[t_min, t_max]` (normalized time).
///
/// The tail bound `∫_{q^K}^∞ f ≤ q^{−K}` fixes the starting `K`. `J` then
/// grows from 8 to 48 in steps of 4; if that is not enough `K` grows by 2
/// and `J` restarts. Fails once the candidate exceeds [`MAX_N_EXP`] terms.
pub fn build_soe(alpha: f64, eps: f64, q: f64, t_min: f64, t_max: f64) -> Result<SoeApprox> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("SOE requires 0 < alpha < 1, got {alpha}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    check_ratio(q)?;
    let cert = Certifier::new(alpha, t_min, t_max, CERT_SAMPLES)?;
    let levels = refine_levels_for(alpha, q, t_min);
    let mut big_k = ((1.0 / eps).ln() / q.ln()).ceil().clamp(2.0, 40.0) as usize;
    let mut best = f64::INFINITY;
    loop {
        let panels = big_k + 1 + levels;
        if panels * J_START > MAX_N_EXP {
            return Err(Error::BudgetExceeded { n_exp: panels * J_START, best });
        }
        for j in (J_START..=J_MAX).step_by(J_STEP) {
            if panels * j > MAX_N_EXP {
                break;
            }
            let mut soe = match SoeApprox::from_panels(alpha, q, big_k, j, levels) {
                Ok(s) => s,
                Err(_) => return Err(Error::BudgetExceeded { n_exp: panels * j, best }),
            };
            let dev = cert.max_deviation(&soe);
            best = best.min(dev);
            if dev <= eps {
                soe.eps_target = eps;
                soe.eps_certified = dev;
                soe.range = (t_min, t_max);
                return Ok(soe);
            }
        }
        big_k += K_STEP;
    }
}
