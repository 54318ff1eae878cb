//! Mittag-Leffler functions and the relaxation kernel `β(t) = E_α(−(t/τ_σ)^α)`.
//!
//! Two evaluation paths are provided. The power series
//! `E_{α,β}(z) = Σ z^j / Γ(jα + β)` is used for `|z| ≤ 1`, where the
//! alternating cancellation is harmless. For larger arguments the
//! Laplace-type integral representation
//!
//! ```text
//! E_α(−t^α) = sin(απ)/π ∫_0^∞ s^{α−1} e^{−st} / (s^{2α} + 2 s^α cos απ + 1) ds
//! ```
//!
//! is integrated after the substitution `x = s^{−α}`. The resulting integrand
//! on `[0, ∞)` is split at `x = 1` and the upper half mapped back onto `[0, 1]`
//! with `x = 1/u`, so both pieces are bounded.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad;

/// Largest `|z|` evaluated with the power series.
pub const SERIES_RADIUS: f64 = 1.0;
/// Series terms before giving up.
pub const MAX_TERMS: usize = 200;
const SERIES_REL_TOL: f64 = 1e-17;
const SERIES_ABS_FLOOR: f64 = 1e-30;
/// Absolute tolerance for each half of the integral representation.
const INTEGRAL_TOL: f64 = 5e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlParams {
    pub alpha: f64,
    pub beta: f64,
}

impl MlParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::invalid(format!("beta must be positive, got {beta}")));
        }
        Ok(Self { alpha, beta })
    }

    /// One-parameter function `E_α = E_{α,1}`.
    pub fn single(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0)
    }
}

/// Power series for `E_{α,β}` with the reciprocal gamma factors tabulated once.
#[derive(Debug, Clone)]
pub struct MlSeries {
    params: MlParams,
    inv_gamma: Vec<f64>,
}

impl MlSeries {
    pub fn new(params: MlParams) -> Self {
        let inv_gamma = (0..MAX_TERMS)
            .map(|j| {
                let g = libm::tgamma(j as f64 * params.alpha + params.beta);
                if g.is_finite() {
                    1.0 / g
                } else {
                    0.0
                }
            })
            .collect();
        Self { params, inv_gamma }
    }

    pub fn params(&self) -> MlParams {
        self.params
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        let mut sum = 0.0;
        let mut power = 1.0;
        for (j, &c) in self.inv_gamma.iter().enumerate() {
            let term = power * c;
            if !term.is_finite() {
                break;
            }
            sum += term;
            if j > 0 && term.abs() <= (SERIES_REL_TOL * sum.abs()).max(SERIES_ABS_FLOOR) {
                return Ok(sum);
            }
            power *= z;
        }
        Err(Error::NonConvergence { z, terms: MAX_TERMS })
    }
}

/// `Σ_{j≥0} z^j / Γ(jα + β)`.
pub fn ml_series(params: MlParams, z: f64) -> Result<f64> {
    MlSeries::new(params).eval(z)
}

fn check_fractional(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("integral path requires 0 < alpha < 1, got {alpha}")))
    }
}

/// `E_α(−t^α)` from the integral representation, `0 < α < 1`, `t ≥ 0`.
pub fn ml_integral(alpha: f64, t: f64) -> Result<f64> {
    check_fractional(alpha)?;
    if !(t >= 0.0) {
        return Err(Error::invalid(format!("t must be nonnegative, got {t}")));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    let c = (alpha * PI).sin() / (alpha * PI);
    let cs = (alpha * PI).cos();
    let inv = 1.0 / alpha;
    let lower = quad::integrate(
        |x: f64| c * (-t * x.powf(-inv)).exp() / (x * x + 2.0 * x * cs + 1.0),
        0.0,
        1.0,
        INTEGRAL_TOL,
    )?;
    let upper = quad::integrate(
        |u: f64| c * (-t * u.powf(inv)).exp() / (1.0 + 2.0 * u * cs + u * u),
        0.0,
        1.0,
        INTEGRAL_TOL,
    )?;
    Ok(lower + upper)
}

/// `∫_0^X E_α(−u^α) du` from the integral representation.
fn antiderivative_integral(alpha: f64, big_x: f64) -> Result<f64> {
    check_fractional(alpha)?;
    let c = (alpha * PI).sin() / (alpha * PI);
    let cs = (alpha * PI).cos();
    let inv = 1.0 / alpha;
    let lower = quad::integrate(
        |y: f64| {
            let w = y.powf(inv);
            c * w * (-(-big_x / w).exp_m1()) / (y * y + 2.0 * y * cs + 1.0)
        },
        0.0,
        1.0,
        INTEGRAL_TOL,
    )?;
    let upper = quad::integrate(
        |u: f64| {
            let w = u.powf(inv);
            let h = if w == 0.0 { big_x } else { -(-big_x * w).exp_m1() / w };
            c * h / (1.0 + 2.0 * u * cs + u * u)
        },
        0.0,
        1.0,
        INTEGRAL_TOL,
    )?;
    Ok(lower + upper)
}

/// The relaxation kernel `β(t) = E_α(−(t/τ_σ)^α)` together with its primitive.
///
/// Holds the series coefficients for `E_{α,1}` and `E_{α,2}` so repeated
/// evaluation does not recompute gamma values. `α = 1` is accepted and
/// reduces to the exponential kernel `e^{−t/τ_σ}`.
#[derive(Debug, Clone)]
pub struct RelaxationKernel {
    alpha: f64,
    tau_sigma: f64,
    e1: MlSeries,
    e2: MlSeries,
}

impl RelaxationKernel {
    pub fn new(alpha: f64, tau_sigma: f64) -> Result<Self> {
        if !(tau_sigma > 0.0) || !tau_sigma.is_finite() {
            return Err(Error::invalid(format!("tau_sigma must be positive, got {tau_sigma}")));
        }
        Ok(Self {
            alpha,
            tau_sigma,
            e1: MlSeries::new(MlParams::new(alpha, 1.0)?),
            e2: MlSeries::new(MlParams::new(alpha, 2.0)?),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn tau_sigma(&self) -> f64 {
        self.tau_sigma
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::invalid(format!("kernel time must be nonnegative, got {t}")));
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        let s = t / self.tau_sigma;
        if self.alpha == 1.0 {
            return Ok((-s).exp());
        }
        let z = s.powf(self.alpha);
        if z <= SERIES_RADIUS {
            self.e1.eval(-z)
        } else {
            ml_integral(self.alpha, s)
        }
    }

    /// `∫_0^x β(s) ds = x · E_{α,2}(−(x/τ_σ)^α)`.
    pub fn antiderivative(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::invalid(format!("antiderivative argument must be nonnegative, got {x}")));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let s = x / self.tau_sigma;
        if self.alpha == 1.0 {
            return Ok(-self.tau_sigma * (-s).exp_m1());
        }
        let z = s.powf(self.alpha);
        if z <= SERIES_RADIUS {
            Ok(x * self.e2.eval(-z)?)
        } else {
            Ok(self.tau_sigma * antiderivative_integral(self.alpha, s)?)
        }
    }
}

pub fn kernel_beta(alpha: f64, tau_sigma: f64, t: f64) -> Result<f64> {
    RelaxationKernel::new(alpha, tau_sigma)?.value(t)
}

pub fn kernel_antiderivative(alpha: f64, tau_sigma: f64, x: f64) -> Result<f64> {
    RelaxationKernel::new(alpha, tau_sigma)?.antiderivative(x)
}
