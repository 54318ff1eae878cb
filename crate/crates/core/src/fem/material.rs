use crate::error::{Error, Result};

/// Isotropic tensor `ξ ↦ scale · (2μ ξ + λ tr(ξ) I)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lame {
    pub mu: f64,
    pub lambda: f64,
    pub scale: f64,
}

impl Lame {
    pub fn new(mu: f64, lambda: f64, scale: f64) -> Self {
        Self { mu, lambda, scale }
    }

    /// Applies the tensor to a symmetric 2×2 strain.
    pub fn apply(&self, strain: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
        let tr = strain[0][0] + strain[1][1];
        let two_mu = 2.0 * self.mu;
        [
            [self.scale * (two_mu * strain[0][0] + self.lambda * tr), self.scale * two_mu * strain[0][1]],
            [self.scale * two_mu * strain[1][0], self.scale * (two_mu * strain[1][1] + self.lambda * tr)],
        ]
    }

    /// Positive definite on symmetric matrices in two dimensions.
    pub fn is_elliptic(&self) -> bool {
        self.scale > 0.0 && self.mu > 0.0 && 2.0 * self.lambda + 2.0 * self.mu > 0.0
    }
}

/// `(G + Gᵀ)/2` for a gradient `G[i][j] = ∂v_i/∂x_j`.
pub fn symmetric_part(grad: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let off = 0.5 * (grad[0][1] + grad[1][0]);
    [[grad[0][0], off], [off, grad[1][1]]]
}

/// Material data of the fractional Zener-type model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub rho: f64,
    pub tau_sigma: f64,
    pub tau_eps: f64,
    pub alpha: f64,
    pub mu_c: f64,
    pub lambda_c: f64,
    pub mu_d: f64,
    pub lambda_d: f64,
}

impl Material {
    /// The parameter set used by the manufactured-solution experiments:
    /// `ρ = 1, τ_σ = 1/2, τ_ε = 1, μ_C = λ_C = 1, μ_D = 1, λ_D = 2`.
    pub fn reference(alpha: f64) -> Self {
        Self {
            rho: 1.0,
            tau_sigma: 0.5,
            tau_eps: 1.0,
            alpha,
            mu_c: 1.0,
            lambda_c: 1.0,
            mu_d: 1.0,
            lambda_d: 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0) {
            return Err(Error::invalid(format!("rho must be positive, got {}", self.rho)));
        }
        if !(self.tau_sigma > 0.0) {
            return Err(Error::invalid(format!("tau_sigma must be positive, got {}", self.tau_sigma)));
        }
        if !(self.tau_eps >= 0.0) {
            return Err(Error::invalid(format!("tau_eps must be nonnegative, got {}", self.tau_eps)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::invalid(format!("alpha must lie in (0, 1], got {}", self.alpha)));
        }
        if !self.c_tensor().is_elliptic() {
            return Err(Error::invalid("stiffness tensor C is not positive definite"));
        }
        if !self.d_tensor().is_elliptic() {
            return Err(Error::invalid("tensor D is not positive definite"));
        }
        Ok(())
    }

    /// `(τ_ε/τ_σ)^α`.
    pub fn retardation_factor(&self) -> f64 {
        (self.tau_eps / self.tau_sigma).powf(self.alpha)
    }

    pub fn c_tensor(&self) -> Lame {
        Lame::new(self.mu_c, self.lambda_c, 1.0)
    }

    pub fn d_tensor(&self) -> Lame {
        Lame::new(self.mu_d, self.lambda_d, 1.0)
    }

    /// `ℂ − (τ_ε/τ_σ)^α 𝔻`, the tensor inside the history integral of the stress.
    pub fn relaxed_tensor(&self) -> Lame {
        let s = self.retardation_factor();
        Lame::new(self.mu_c - s * self.mu_d, self.lambda_c - s * self.lambda_d, 1.0)
    }

    /// `𝔸 = ρ⁻¹ ℂ`.
    pub fn a_form(&self) -> Lame {
        Lame::new(self.mu_c, self.lambda_c, 1.0 / self.rho)
    }

    /// `𝔹 = ρ⁻¹ (ℂ − (τ_ε/τ_σ)^α 𝔻)`; may be indefinite or zero.
    pub fn b_form(&self) -> Lame {
        let r = self.relaxed_tensor();
        Lame::new(r.mu, r.lambda, 1.0 / self.rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_b_tensor() {
        let m = Material::reference(0.5);
        m.validate().unwrap();
        let s = 2f64.sqrt();
        assert!((m.retardation_factor() - s).abs() < 1e-15);
        let b = m.b_form();
        assert!((b.mu - (1.0 - s)).abs() < 1e-15);
        assert!((b.lambda - (1.0 - 2.0 * s)).abs() < 1e-15);
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut m = Material::reference(0.5);
        m.tau_sigma = 0.0;
        assert!(m.validate().is_err());
        let mut m = Material::reference(0.5);
        m.mu_c = -1.0;
        assert!(m.validate().is_err());
        let mut m = Material::reference(1.5);
        m.alpha = 1.5;
        assert!(m.validate().is_err());
    }

    #[test]
    fn lame_apply_trace() {
        let l = Lame::new(2.0, 3.0, 0.5);
        let s = l.apply([[1.0, 0.25], [0.25, -2.0]]);
        assert_eq!(s[0][0], 0.5 * (4.0 - 3.0));
        assert_eq!(s[1][1], 0.5 * (-8.0 - 3.0));
        assert_eq!(s[0][1], 0.5);
    }
}
