//! N-functions, the exponential integral, and the per-edge integrals of the
//! Amemiya objective together with their first two derivatives in `k`.

mod ei;
mod integral;
mod quadrature;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use ei::{ei, EXP_LIMIT};
pub use integral::{
    beta_e, edge_integral, edge_integral_d2k, edge_integral_dk, edge_terms, EdgeTerms, Method,
};
pub use quadrature::gauss_legendre_32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NFuncError {
    #[error("N-function evaluated at negative argument {0}")]
    NegativeArgument(f64),
    #[error("exponential integral requires a positive argument, got {0}")]
    NonPositiveArgument(f64),
    #[error("exponential argument {argument} exceeds the double-precision range")]
    Overflow { argument: f64 },
    #[error("power exponent must be finite and greater than 1, got {0}")]
    InvalidExponent(f64),
    #[error("invalid N-function `{0}` (expected p:<real>, ps:<real>, exp, expsq or linear)")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NFunctionKind {
    /// `c·tᵖ`; `c = (p−1)^{p−1}/pᵖ` when scaled, otherwise 1.
    Power { p: f64, scaled: bool },
    /// `eᵗ − t − 1`.
    ExpLinear,
    /// `e^{t²} − 1`.
    ExpSquare,
    /// `t`, the linear limit. Not an N-function proper, but its GSI-M is the
    /// infimum approached as `k → ∞`.
    LimitLinear,
}

/// One entry of the N-function catalog.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NFunction(NFunctionKind);

impl NFunction {
    pub fn power(p: f64) -> Result<Self, NFuncError> {
        check_exponent(p)?;
        Ok(Self(NFunctionKind::Power { p, scaled: false }))
    }

    pub fn scaled_power(p: f64) -> Result<Self, NFuncError> {
        check_exponent(p)?;
        Ok(Self(NFunctionKind::Power { p, scaled: true }))
    }

    pub fn exp_linear() -> Self {
        Self(NFunctionKind::ExpLinear)
    }

    pub fn exp_square() -> Self {
        Self(NFunctionKind::ExpSquare)
    }

    pub fn limit_linear() -> Self {
        Self(NFunctionKind::LimitLinear)
    }

    pub fn kind(&self) -> NFunctionKind {
        self.0
    }

    /// Multiplier in front of `tᵖ` for power kinds, 1 otherwise.
    pub fn prefactor(&self) -> f64 {
        match self.0 {
            NFunctionKind::Power { p, scaled: true } => power_prefactor(p),
            _ => 1.0,
        }
    }

    /// `(p−1)^{p−1}/pᵖ` for power kinds, 1 otherwise: the multiplier the
    /// scaled variant of this exponent would carry.
    pub fn prefactor_of_scaled(&self) -> f64 {
        match self.0 {
            NFunctionKind::Power { p, .. } => power_prefactor(p),
            _ => 1.0,
        }
    }

    pub fn value(&self, t: f64) -> Result<f64, NFuncError> {
        check_argument(t)?;
        Ok(match self.0 {
            NFunctionKind::Power { p, .. } => self.prefactor() * t.powf(p),
            NFunctionKind::ExpLinear => {
                guard_exp(t)?;
                // expm1 keeps the small-t regime accurate
                t.exp_m1() - t
            }
            NFunctionKind::ExpSquare => {
                guard_exp(t * t)?;
                (t * t).exp_m1()
            }
            NFunctionKind::LimitLinear => t,
        })
    }

    pub fn derivative(&self, t: f64) -> Result<f64, NFuncError> {
        check_argument(t)?;
        Ok(match self.0 {
            NFunctionKind::Power { p, .. } => self.prefactor() * p * t.powf(p - 1.0),
            NFunctionKind::ExpLinear => {
                guard_exp(t)?;
                t.exp_m1()
            }
            NFunctionKind::ExpSquare => {
                guard_exp(t * t)?;
                2.0 * t * (t * t).exp()
            }
            NFunctionKind::LimitLinear => 1.0,
        })
    }

    pub fn second_derivative(&self, t: f64) -> Result<f64, NFuncError> {
        check_argument(t)?;
        Ok(match self.0 {
            NFunctionKind::Power { p, .. } => {
                self.prefactor() * p * (p - 1.0) * t.powf(p - 2.0)
            }
            NFunctionKind::ExpLinear => {
                guard_exp(t)?;
                t.exp()
            }
            NFunctionKind::ExpSquare => {
                guard_exp(t * t)?;
                (2.0 + 4.0 * t * t) * (t * t).exp()
            }
            NFunctionKind::LimitLinear => 0.0,
        })
    }
}

/// `(p−1)^{p−1} / pᵖ`.
pub fn power_prefactor(p: f64) -> f64 {
    ((p - 1.0) * (p - 1.0).ln() - p * p.ln()).exp()
}

fn check_exponent(p: f64) -> Result<(), NFuncError> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(NFuncError::InvalidExponent(p))
    }
}

fn check_argument(t: f64) -> Result<(), NFuncError> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(NFuncError::NegativeArgument(t))
    }
}

fn guard_exp(x: f64) -> Result<(), NFuncError> {
    if x > EXP_LIMIT {
        Err(NFuncError::Overflow { argument: x })
    } else {
        Ok(())
    }
}

impl FromStr for NFunction {
    type Err = NFuncError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || NFuncError::Parse(s.to_string());
        let exponent = |rest: &str| rest.trim().parse::<f64>().map_err(|_| bad());
        match s.trim() {
            "exp" => Ok(Self::exp_linear()),
            "expsq" => Ok(Self::exp_square()),
            "linear" => Ok(Self::limit_linear()),
            other => {
                if let Some(rest) = other.strip_prefix("ps:") {
                    Self::scaled_power(exponent(rest)?)
                } else if let Some(rest) = other.strip_prefix("p:") {
                    Self::power(exponent(rest)?)
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl fmt::Display for NFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            NFunctionKind::Power { p, scaled: true } => write!(f, "ps:{p}"),
            NFunctionKind::Power { p, scaled: false } => write!(f, "p:{p}"),
            NFunctionKind::ExpLinear => f.write_str("exp"),
            NFunctionKind::ExpSquare => f.write_str("expsq"),
            NFunctionKind::LimitLinear => f.write_str("linear"),
        }
    }
}

/// Geometry of one shortest-path tree edge as seen by the weight function
/// `w̄_t = (w_e/λ(G))·t + 1 + λ(γ_e)/λ(G)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGeometry {
    /// Edge length `w_e`.
    pub weight: f64,
    /// Length measure `λ(γ_e)` of the part of the graph hanging below the edge.
    pub lambda_gamma: f64,
    /// Total length `λ(G)`.
    pub lambda_total: f64,
}

impl EdgeGeometry {
    /// Slope of the weight function in `t`.
    pub fn slope(&self) -> f64 {
        self.weight / self.lambda_total
    }

    /// Weight function at `t = 0`.
    pub fn offset(&self) -> f64 {
        1.0 + self.lambda_gamma / self.lambda_total
    }

    pub fn weight_at(&self, t: f64) -> f64 {
        self.slope() * t + self.offset()
    }
}
