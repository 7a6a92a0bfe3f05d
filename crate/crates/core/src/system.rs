//! System specifications: which coupled system is being solved, with which
//! nonlinearities, at which parameter point.

use crate::nonlinearity::{Nonlinearity, NonlinearityError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SystemError {
    #[error("parameters must be strictly positive, got lambda = {0}, gamma = {1}")]
    BadParams(f64, f64),
    #[error("ray slope must be strictly positive, got {0}")]
    BadSigma(f64),
    #[error(transparent)]
    Nonlinearity(#[from] NonlinearityError),
}

/// The three coupled systems on the unit ball.
///
/// With right-hand sides written as (-Δu, -Δv) = (λ R₁(u,v), γ R₂(u,v)):
/// - `G`: R₁ = f'(u) g(v),  R₂ = f(u) g'(v)   (gradient coupling)
/// - `H`: R₁ = f(u) g'(v),  R₂ = f'(u) g(v)   (Hamiltonian coupling)
/// - `E`: R₁ = e^v,         R₂ = e^u          (exponential cross coupling)
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    G,
    H,
    E,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::G => write!(f, "G"),
            Variant::H => write!(f, "H"),
            Variant::E => write!(f, "E"),
        }
    }
}

/// Right-hand sides and their partial derivatives at one node.
#[derive(Debug, Clone, Copy)]
pub struct RhsValues {
    pub r1: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct RhsPartials {
    pub d1_du: f64,
    pub d1_dv: f64,
    pub d2_du: f64,
    pub d2_dv: f64,
}

#[derive(Debug, Clone)]
pub struct SystemSpec {
    pub variant: Variant,
    pub f: Nonlinearity,
    pub g: Nonlinearity,
}

impl SystemSpec {
    /// Variant E ignores the supplied kinds: both nonlinearities are forced
    /// exponential.
    pub fn new(variant: Variant, f: Nonlinearity, g: Nonlinearity) -> Self {
        match variant {
            Variant::E => SystemSpec {
                variant,
                f: Nonlinearity::exponential(),
                g: Nonlinearity::exponential(),
            },
            _ => SystemSpec { variant, f, g },
        }
    }

    pub fn exponential() -> Self {
        SystemSpec::new(Variant::E, Nonlinearity::exponential(), Nonlinearity::exponential())
    }

    pub fn power_g(p: f64, q: f64) -> Result<Self, SystemError> {
        Ok(SystemSpec::new(Variant::G, Nonlinearity::power(p)?, Nonlinearity::power(q)?))
    }

    pub fn power_h(p: f64, q: f64) -> Result<Self, SystemError> {
        Ok(SystemSpec::new(Variant::H, Nonlinearity::power(p)?, Nonlinearity::power(q)?))
    }

    pub fn rhs(&self, u: f64, v: f64) -> Result<RhsValues, NonlinearityError> {
        Ok(match self.variant {
            Variant::G => RhsValues {
                r1: self.f.eval(u, 1)? * self.g.eval(v, 0)?,
                r2: self.f.eval(u, 0)? * self.g.eval(v, 1)?,
            },
            Variant::H => RhsValues {
                r1: self.f.eval(u, 0)? * self.g.eval(v, 1)?,
                r2: self.f.eval(u, 1)? * self.g.eval(v, 0)?,
            },
            Variant::E => RhsValues { r1: v.exp(), r2: u.exp() },
        })
    }

    pub fn rhs_partials(&self, u: f64, v: f64) -> Result<RhsPartials, NonlinearityError> {
        Ok(match self.variant {
            Variant::G => RhsPartials {
                d1_du: self.f.eval(u, 2)? * self.g.eval(v, 0)?,
                d1_dv: self.f.eval(u, 1)? * self.g.eval(v, 1)?,
                d2_du: self.f.eval(u, 1)? * self.g.eval(v, 1)?,
                d2_dv: self.f.eval(u, 0)? * self.g.eval(v, 2)?,
            },
            Variant::H => RhsPartials {
                d1_du: self.f.eval(u, 1)? * self.g.eval(v, 1)?,
                d1_dv: self.f.eval(u, 0)? * self.g.eval(v, 2)?,
                d2_du: self.f.eval(u, 2)? * self.g.eval(v, 0)?,
                d2_dv: self.f.eval(u, 1)? * self.g.eval(v, 1)?,
            },
            Variant::E => RhsPartials { d1_du: 0.0, d1_dv: v.exp(), d2_du: u.exp(), d2_dv: 0.0 },
        })
    }

    /// Structurally symmetric under (u, λ) <-> (v, γ): swapping the fields
    /// maps the system onto itself.
    pub fn is_symmetric(&self) -> bool {
        match (&self.f, &self.g) {
            (Nonlinearity::Exponential, Nonlinearity::Exponential) => true,
            (Nonlinearity::Power { exponent: p }, Nonlinearity::Power { exponent: q }) => p == q,
            _ => false,
        }
    }

    /// Power exponents (p, q) when both nonlinearities are power kind.
    pub fn power_exponents(&self) -> Option<(f64, f64)> {
        Some((self.f.power_exponent()?, self.g.power_exponent()?))
    }
}

/// A parameter point (λ, γ) with both components strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamPoint {
    pub lambda: f64,
    pub gamma: f64,
}

impl ParamPoint {
    pub fn new(lambda: f64, gamma: f64) -> Result<Self, SystemError> {
        if !(lambda > 0.0) || !(gamma > 0.0) || !lambda.is_finite() || !gamma.is_finite() {
            return Err(SystemError::BadParams(lambda, gamma));
        }
        Ok(ParamPoint { lambda, gamma })
    }

    pub fn on_ray(sigma: f64, lambda: f64) -> Result<Self, SystemError> {
        if !(sigma > 0.0) {
            return Err(SystemError::BadSigma(sigma));
        }
        ParamPoint::new(lambda, sigma * lambda)
    }
}

/// The ray (λ, σλ) in the parameter quadrant, with the λ-interval covered by
/// a completed trace: [lambda_lo, lambda_hi).
#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub sigma: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

impl Ray {
    pub fn new(sigma: f64, lambda_lo: f64, lambda_hi: f64) -> Result<Self, SystemError> {
        if !(sigma > 0.0) {
            return Err(SystemError::BadSigma(sigma));
        }
        Ok(Ray { sigma, lambda_lo, lambda_hi })
    }
}
