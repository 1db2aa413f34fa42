//! Splittings `J = J₁ − J₂` of the degenerate mobility functionals, frozen at `uⁿ`.

use log::warn;

use super::potential::{mobility_mch, mobility_nmn, n_fun};
use super::ChParams;
use crate::error::{Error, Result};
use crate::linop::{MobilitySplit, VectorSpace};
use crate::spectral::{DiagonalSymbol, RealField, Spectral};

fn negative_j2(j2: f64, allow: bool, hint: &str) -> Result<()> {
    if allow {
        warn!("negative explicit mobility part J2 = {j2:.3e}; taking the implicit step");
        Ok(())
    } else {
        Err(Error::InvalidSplitting {
            j2,
            hint: hint.to_string(),
        })
    }
}

/// `J(μ) = ½∫ M(uⁿ)|∇μ|²` with `J₁ = ½∫ m|∇μ|²` and `J₂ = ½∫ (m − M(uⁿ))|∇μ|²`.
pub struct MchSplit<'a> {
    sp: &'a Spectral,
    l1: DiagonalSymbol,
    /// `m − M(uⁿ)`.
    deficit: RealField,
    mobility: RealField,
    allow_negative: bool,
}

impl<'a> MchSplit<'a> {
    pub fn new(sp: &'a Spectral, un: &RealField, p: &ChParams) -> Self {
        let mobility = un.map(mobility_mch);
        let m = p.m;
        MchSplit {
            sp,
            l1: DiagonalSymbol::k2(*sp.grid()).scaled(m),
            deficit: mobility.map(|v| m - v),
            mobility,
            allow_negative: p.allow_negative_j2,
        }
    }

    /// `M(uⁿ)` at the nodes.
    pub fn mobility(&self) -> &RealField {
        &self.mobility
    }

    /// `J(μ) = ½∫ M(uⁿ)|∇μ|²` evaluated directly.
    pub fn j_direct(&self, mu: &RealField) -> f64 {
        0.5 * self
            .sp
            .weighted_dirichlet(&self.mobility, mu)
            .expect("split built on this grid")
    }
}

impl MobilitySplit for MchSplit<'_> {
    type Vector = RealField;
    type Kernel = DiagonalSymbol;

    fn implicit_kernel(&self) -> &DiagonalSymbol {
        &self.l1
    }

    fn apply_l1tl1(&self, mu: &RealField) -> RealField {
        self.sp.filter(mu, &self.l1).expect("split built on this grid")
    }

    fn apply_l2tl2(&self, mu: &RealField) -> RealField {
        self.sp
            .neg_div_coef_grad(&self.deficit, mu)
            .expect("split built on this grid")
    }

    fn on_negative_j2(&self, j2: f64) -> Result<()> {
        negative_j2(j2, self.allow_negative, "m must be at least sup M(u) = 2.25")
    }
}

/// `J(μ) = ½∫ M(uⁿ)|∇(N(uⁿ)μ)|²` with `J₁ = ½∫ m|∇μ|² + β μ²` and `J₂ = J₁ − J`.
pub struct NmnSplit<'a> {
    sp: &'a Spectral,
    l1: DiagonalSymbol,
    mobility: RealField,
    n: RealField,
    allow_negative: bool,
}

impl<'a> NmnSplit<'a> {
    pub fn new(sp: &'a Spectral, un: &RealField, p: &ChParams) -> Self {
        let eps = p.eps;
        let (m, beta) = (p.m, p.beta);
        NmnSplit {
            sp,
            l1: DiagonalSymbol::k2(*sp.grid()).map(|k2| m * k2 + beta),
            mobility: un.map(|s| mobility_nmn(s, eps)),
            n: un.map(|s| n_fun(s, eps)),
            allow_negative: p.allow_negative_j2,
        }
    }

    /// `J(μ)` evaluated directly.
    pub fn j_direct(&self, mu: &RealField) -> f64 {
        let nmu = self.n.mul(mu).expect("same grid");
        0.5 * self
            .sp
            .weighted_dirichlet(&self.mobility, &nmu)
            .expect("split built on this grid")
    }
}

impl MobilitySplit for NmnSplit<'_> {
    type Vector = RealField;
    type Kernel = DiagonalSymbol;

    fn implicit_kernel(&self) -> &DiagonalSymbol {
        &self.l1
    }

    fn apply_l1tl1(&self, mu: &RealField) -> RealField {
        self.sp.filter(mu, &self.l1).expect("split built on this grid")
    }

    /// `−mΔμ + βμ + N div(M ∇(Nμ))`.
    fn apply_l2tl2(&self, mu: &RealField) -> RealField {
        let nmu = self.n.mul(mu).expect("same grid");
        let inner = self
            .sp
            .neg_div_coef_grad(&self.mobility, &nmu)
            .expect("split built on this grid");
        let mut out = self.apply_l1tl1(mu);
        out.axpy(-1.0, &self.n.mul(&inner).expect("same grid"));
        out
    }

    fn on_negative_j2(&self, j2: f64) -> Result<()> {
        negative_j2(j2, self.allow_negative, "increase m and/or beta")
    }
}
