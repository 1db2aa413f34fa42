use serde::{Deserialize, Serialize};

use super::potential::MOBILITY_MCH_SUP;
use crate::error::{Error, Result};
use crate::spectral::{GridSpec, Spectral};

/// Scalars shared by the Cahn-Hilliard steppers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChParams {
    /// Interface width `ε`.
    pub eps: f64,
    pub dt: f64,
    /// Coefficient of `u` in the implicit part of `μ`, i.e. `α/ε²`.
    pub alpha_over_eps2: f64,
    /// Constant mobility treated implicitly.
    pub m: f64,
    /// Zeroth-order implicit term of the NMN splitting.
    #[serde(default)]
    pub beta: f64,
    /// Added under every `√J₂` and `√∫W` in denominators.
    #[serde(default = "default_c0")]
    pub c0: f64,
    #[serde(default = "default_true")]
    pub clamp_r: bool,
    /// 2/3-rule filtering of variable-coefficient products.
    #[serde(default)]
    pub dealias: bool,
    /// Accept states where the explicit mobility part is negative (as happens
    /// with `m < sup M`), logging a warning and taking the pure implicit step
    /// instead of failing.
    #[serde(default)]
    pub allow_negative_j2: bool,
}

fn default_c0() -> f64 {
    1e-12
}

fn default_true() -> bool {
    true
}

impl ChParams {
    /// `δt = ε⁴`, `α/ε² = 2/ε²`, `β = 2/ε²`, with the given `m`.
    pub fn scaled(eps: f64, m: f64) -> Self {
        ChParams {
            eps,
            dt: eps.powi(4),
            alpha_over_eps2: 2.0 / (eps * eps),
            m,
            beta: 2.0 / (eps * eps),
            c0: default_c0(),
            clamp_r: true,
            dealias: false,
            allow_negative_j2: false,
        }
    }

    /// Transform plans for `grid` with this run's dealiasing setting.
    pub fn spectral(&self, grid: GridSpec) -> Spectral {
        Spectral::new(grid).with_dealias(self.dealias)
    }

    /// `α = ε² · (α/ε²)`.
    pub fn alpha(&self) -> f64 {
        self.alpha_over_eps2 * self.eps * self.eps
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps", self.eps),
            ("dt", self.dt),
            ("alpha_over_eps2", self.alpha_over_eps2),
            ("m", self.m),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("beta", self.beta), ("c0", self.c0)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Conditions that do not prevent a run but void the stability theory.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.alpha() < 1.0 {
            out.push(format!(
                "alpha = eps^2 * alpha_over_eps2 = {:.3} < max|W''| = 1: the explicit part is not concave",
                self.alpha()
            ));
        }
        if self.m < MOBILITY_MCH_SUP {
            out.push(format!(
                "m = {} < sup M = {MOBILITY_MCH_SUP}: the degenerate-mobility splitting may have negative J2",
                self.m
            ));
        }
        out
    }
}
