//! Strain-limiting, transversely isotropic elastic response.
//!
//! The linear part is
//!
//! ```text
//! E[ε] = 2μ ε + λ tr(ε) I + γ (ε : M) M,    M = a ⊗ a,  a = (cos θ, sin θ)
//! ```
//!
//! and the nonlinear law in its two equivalent directions reads
//!
//! ```text
//! T = Ψ(‖E^½ ε‖) E[ε],          Ψ(s) = (1 − (β s)^α)^(−1/α)
//! ε = K[T] / (1 + (β ‖K^½ T‖)^α)^(1/α),   K = E⁻¹
//! ```
//!
//! `‖E^½ ε‖` is evaluated as `√(ε : E[ε])`; no tensor square root is formed.

use crate::error::{Error, Result};
use crate::tensor::{SymTensor2, Tensor4};

/// Material and strain-limiting parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialModel {
    /// Lamé shear modulus μ.
    pub mu: f64,
    /// Lamé first parameter λ.
    pub lambda_lame: f64,
    /// Fiber reinforcement modulus γ.
    pub gamma: f64,
    /// Strain-limiting parameter β; `0` recovers linear elasticity.
    pub beta: f64,
    /// Strain-limiting exponent α.
    pub alpha: f64,
    /// Fiber angle θ from the x-axis, radians.
    pub fiber_angle: f64,
}

impl Default for MaterialModel {
    fn default() -> Self {
        MaterialModel {
            mu: 1.0,
            lambda_lame: 1.0,
            gamma: 0.5,
            beta: 1.0,
            alpha: 1.0,
            fiber_angle: 0.0,
        }
    }
}

impl MaterialModel {
    /// Lamé parameters from Young's modulus and Poisson's ratio.
    pub fn lame_from_young_poisson(young: f64, poisson: f64) -> (f64, f64) {
        let mu = young / (2.0 * (1.0 + poisson));
        let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        (mu, lambda)
    }

    pub fn with_beta(self, beta: f64) -> Self {
        MaterialModel { beta, ..self }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        MaterialModel { alpha, ..self }
    }

    pub fn with_fiber_angle(self, fiber_angle: f64) -> Self {
        MaterialModel { fiber_angle, ..self }
    }

    pub fn fiber_direction(&self) -> [f64; 2] {
        [self.fiber_angle.cos(), self.fiber_angle.sin()]
    }

    /// Structural tensor `M = a ⊗ a`.
    pub fn structural_tensor(&self) -> SymTensor2 {
        SymTensor2::dyad(self.fiber_direction())
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64, ok: bool| {
            if !v.is_finite() || !ok {
                Err(Error::InvalidMaterial(format!("{name} = {v}")))
            } else {
                Ok(())
            }
        };
        check("mu", self.mu, self.mu > 0.0)?;
        check("lambda", self.lambda_lame, self.lambda_lame > 0.0)?;
        check("gamma", self.gamma, self.gamma >= 0.0)?;
        check("beta", self.beta, self.beta >= 0.0)?;
        check("alpha", self.alpha, self.alpha > 0.0)?;
        check("fiber_angle", self.fiber_angle, true)?;
        Ok(())
    }
}

/// Mandel matrix of `E`.
pub fn elasticity_tensor(model: &MaterialModel) -> Result<Tensor4> {
    model.validate()?;
    let identity = SymTensor2::IDENTITY;
    let fiber = model.structural_tensor();
    let e = Tensor4::IDENTITY.scaled(2.0 * model.mu)
        + Tensor4::outer(&identity, &identity).scaled(model.lambda_lame)
        + Tensor4::outer(&fiber, &fiber).scaled(model.gamma);
    if !e.is_positive_definite() {
        return Err(Error::InvalidMaterial(
            "elasticity tensor is not positive definite".into(),
        ));
    }
    Ok(e)
}

/// Mandel matrix of `K = E⁻¹`.
pub fn compliance_tensor(model: &MaterialModel) -> Result<Tensor4> {
    let e = elasticity_tensor(model)?;
    e.inverse()
        .map(|k| k.symmetrized())
        .ok_or_else(|| Error::InvalidMaterial("singular elasticity tensor".into()))
}

/// `Ψ(s) = (1 − (β s)^α)^(−1/α)`.
pub fn psi(s: f64, beta: f64, alpha: f64) -> Result<f64> {
    if beta == 0.0 {
        return Ok(1.0);
    }
    let x = (beta * s).powf(alpha);
    if !(x < 1.0) {
        return Err(Error::InadmissibleStrain { s, value: x });
    }
    Ok((1.0 - x).powf(-1.0 / alpha))
}

/// Clamps `s` so that `(β s)^α ≤ 1 − delta` before evaluating `Ψ`.
/// Returns the value and whether the clamp was active.
pub fn psi_guarded(s: f64, beta: f64, alpha: f64, delta: f64) -> (f64, bool) {
    if beta == 0.0 {
        return (1.0, false);
    }
    let x = (beta * s).powf(alpha);
    let limit = 1.0 - delta;
    if x > limit {
        ((1.0 - limit).powf(-1.0 / alpha), true)
    } else {
        ((1.0 - x).powf(-1.0 / alpha), false)
    }
}

/// A validated material with `E` and `K` precomputed.
#[derive(Clone, Copy, Debug)]
pub struct ConstitutiveLaw {
    pub model: MaterialModel,
    pub elasticity: Tensor4,
    pub compliance: Tensor4,
}

impl ConstitutiveLaw {
    pub fn new(model: &MaterialModel) -> Result<Self> {
        let elasticity = elasticity_tensor(model)?;
        let compliance = compliance_tensor(model)?;
        Ok(ConstitutiveLaw {
            model: *model,
            elasticity,
            compliance,
        })
    }

    pub fn beta(&self) -> f64 {
        self.model.beta
    }

    pub fn alpha(&self) -> f64 {
        self.model.alpha
    }

    pub fn energy_norm(&self, eps: &SymTensor2) -> f64 {
        self.elasticity.quadratic_form(eps).max(0.0).sqrt()
    }

    /// `‖K^½ T‖`.
    pub fn compliance_norm(&self, stress: &SymTensor2) -> f64 {
        self.compliance.quadratic_form(stress).max(0.0).sqrt()
    }

    pub fn psi_of_strain(&self, eps: &SymTensor2) -> Result<f64> {
        psi(self.energy_norm(eps), self.model.beta, self.model.alpha)
    }

    pub fn stress_from_strain(&self, eps: &SymTensor2) -> Result<SymTensor2> {
        let factor = self.psi_of_strain(eps)?;
        Ok(factor * self.elasticity.apply(eps))
    }

    /// Total map from stress to strain. The result always satisfies
    /// `β ‖E^½ ε‖ < 1` as evaluated by [`Self::energy_norm`].
    pub fn strain_from_stress(&self, stress: &SymTensor2) -> SymTensor2 {
        let linear = self.compliance.apply(stress);
        let (beta, alpha) = (self.model.beta, self.model.alpha);
        if beta == 0.0 {
            return linear;
        }
        let bt = beta * self.compliance_norm(stress);
        if bt == 0.0 {
            return linear;
        }
        // For large β t write (1 + (βt)^α)^(1/α) = βt (1 + (βt)^-α)^(1/α) to
        // avoid overflow in (βt)^α.
        let denom = if bt > 1.0 {
            bt * (1.0 + bt.powf(-alpha)).powf(1.0 / alpha)
        } else {
            (1.0 + bt.powf(alpha)).powf(1.0 / alpha)
        };
        let mut eps = (1.0 / denom) * linear;
        // Far out on the stress axis the exact bound sits within rounding of
        // 1/β; pull the result strictly inside the open ball.
        let ceiling = 1.0 - 4.0 * f64::EPSILON;
        for _ in 0..4 {
            let bs = beta * self.energy_norm(&eps);
            if bs < ceiling {
                break;
            }
            eps = (ceiling / bs * (1.0 - f64::EPSILON)) * eps;
        }
        eps
    }

    /// Strain-energy density `T : ε`.
    pub fn energy_density(&self, eps: &SymTensor2) -> Result<f64> {
        Ok(self.stress_from_strain(eps)?.ddot(eps))
    }
}

pub fn energy_norm(eps: &SymTensor2, model: &MaterialModel) -> Result<f64> {
    Ok(ConstitutiveLaw::new(model)?.energy_norm(eps))
}

pub fn stress_from_strain(eps: &SymTensor2, model: &MaterialModel) -> Result<SymTensor2> {
    ConstitutiveLaw::new(model)?.stress_from_strain(eps)
}

pub fn strain_from_stress(stress: &SymTensor2, model: &MaterialModel) -> Result<SymTensor2> {
    Ok(ConstitutiveLaw::new(model)?.strain_from_stress(stress))
}

pub fn energy_density(eps: &SymTensor2, model: &MaterialModel) -> Result<f64> {
    ConstitutiveLaw::new(model)?.energy_density(eps)
}
