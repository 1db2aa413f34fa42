use super::potential::{w, w_prime};
use super::ChParams;
use crate::error::Result;
use crate::linop::{QuadraticEnergy, VectorSpace};
use crate::spectral::{DiagonalSymbol, RealField, Spectral};

/// Cahn-Hilliard energy `P_ε(u) = ∫ (ε/2)|∇u|² + W(u)/ε`.
pub fn energy_p_eps(sp: &Spectral, u: &RealField, eps: f64) -> Result<f64> {
    let grad2 = sp.dirichlet_energy(u)?;
    let well = u.map(w).integral();
    Ok(0.5 * eps * grad2 + well / eps)
}

/// Relaxed energy `½∫|∇u|² + r²/ε²` of the classic SAV scheme.
pub fn relaxed_energy(sp: &Spectral, u: &RealField, r: f64, eps: f64) -> Result<f64> {
    Ok(0.5 * sp.dirichlet_energy(u)? + r * r / (eps * eps))
}

/// The quadratic energy `E_n(u) = P̄_{ε,uⁿ}(u)/ε` obtained by linearising the
/// concave part `∫ (W(u) − α u²/2)/ε` of `P_ε` at `uⁿ`.
///
/// `A*A = −Δ + α/ε²` and `A*b = −(W'(uⁿ)/ε² − (α/ε²) uⁿ)`, and
/// `E_n(uⁿ) = P_ε(uⁿ)/ε`, `E_n ≥ P_ε/ε` when `α ≥ max|W''|`.
pub struct LinearizedChEnergy<'a> {
    sp: &'a Spectral,
    c: f64,
    ata: DiagonalSymbol,
    neg_ata: DiagonalSymbol,
    un: RealField,
    atb: RealField,
    constant: f64,
}

impl<'a> LinearizedChEnergy<'a> {
    pub fn new(sp: &'a Spectral, un: &RealField, p: &ChParams) -> Self {
        let c = p.alpha_over_eps2;
        let inv_eps2 = 1.0 / (p.eps * p.eps);
        let ata = DiagonalSymbol::k2(*sp.grid()).map(|k2| k2 + c);
        let neg_ata = ata.scaled(-1.0);
        let atb = un.map(|s| -(w_prime(s) * inv_eps2 - c * s));
        let constant = un.map(|s| (w(s) - 0.5 * c * s * s / inv_eps2) * inv_eps2).integral();
        LinearizedChEnergy {
            sp,
            c,
            ata,
            neg_ata,
            un: un.clone(),
            atb,
            constant,
        }
    }

    /// Symbol of `A*A`, `|k|² + α/ε²`.
    pub fn ata_symbol(&self) -> &DiagonalSymbol {
        &self.ata
    }
}

impl QuadraticEnergy for LinearizedChEnergy<'_> {
    type Vector = RealField;
    type Kernel = DiagonalSymbol;

    fn value(&self, u: &RealField) -> f64 {
        let grad2 = self
            .sp
            .dirichlet_energy(u)
            .expect("energy built on this grid");
        let mut diff = u.clone();
        diff.axpy(-1.0, &self.un);
        0.5 * grad2 + 0.5 * self.c * u.dot(u) - self.atb.dot(&diff) + self.constant
    }

    fn apply_ata(&self, u: &RealField) -> RealField {
        self.sp.filter(u, &self.ata).expect("energy built on this grid")
    }

    fn atb(&self) -> &RealField {
        &self.atb
    }

    fn block_solve(
        &self,
        tau: f64,
        kernel: &DiagonalSymbol,
        rhs_u: &RealField,
        rhs_mu: &RealField,
    ) -> Result<(RealField, RealField)> {
        self.sp
            .block_solve(&kernel.scaled(tau), &self.neg_ata, rhs_u, rhs_mu)
    }
}
