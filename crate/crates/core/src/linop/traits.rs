use super::VectorSpace;
use crate::error::{Error, Result};

/// A convex quadratic energy `E(u) = ½‖Au − b‖²`, known only through the
/// operators `A*A`, `A*b` and a solver for the coupled block system
///
/// ```text
/// [  I     τK ] [u]   [rhs_u ]
/// [ -A*A   I  ] [μ] = [rhs_mu]
/// ```
///
/// where `K` is a positive operator supplied by the mobility splitting.
pub trait QuadraticEnergy {
    type Vector: VectorSpace;
    /// Representation of the positive operator `K` accepted by [`Self::block_solve`].
    type Kernel: ?Sized;

    /// `E(u)`, possibly up to an additive constant fixed for the lifetime of `self`.
    fn value(&self, u: &Self::Vector) -> f64;

    fn apply_ata(&self, u: &Self::Vector) -> Self::Vector;

    /// The constant term `A*b`.
    fn atb(&self) -> &Self::Vector;

    /// `∇E(u) = A*A u − A*b`.
    fn gradient(&self, u: &Self::Vector) -> Self::Vector {
        self.apply_ata(u).plus_scaled(-1.0, self.atb())
    }

    fn block_solve(
        &self,
        tau: f64,
        kernel: &Self::Kernel,
        rhs_u: &Self::Vector,
        rhs_mu: &Self::Vector,
    ) -> Result<(Self::Vector, Self::Vector)>;
}

/// A mobility functional split as `J = J₁ − J₂` with `J_i(μ) = ½‖L_i μ‖²`.
///
/// The steppers only use `L₁*L₁` (implicitly, through [`Self::implicit_kernel`])
/// and `L₂*L₂` (explicitly). The remaining methods have defaults in terms of
/// those two and the inner product, but implementations may override them
/// with direct formulas.
pub trait MobilitySplit {
    type Vector: VectorSpace;
    type Kernel: ?Sized;

    /// `L₁*L₁` in the form consumed by [`QuadraticEnergy::block_solve`].
    fn implicit_kernel(&self) -> &Self::Kernel;

    fn apply_l1tl1(&self, mu: &Self::Vector) -> Self::Vector;

    fn apply_l2tl2(&self, mu: &Self::Vector) -> Self::Vector;

    fn j1(&self, mu: &Self::Vector) -> f64 {
        0.5 * self.apply_l1tl1(mu).dot(mu)
    }

    fn j2(&self, mu: &Self::Vector) -> f64 {
        0.5 * self.apply_l2tl2(mu).dot(mu)
    }

    /// `⟨L₂μ, L₂ν⟩`.
    fn cross(&self, mu: &Self::Vector, nu: &Self::Vector) -> f64 {
        self.apply_l2tl2(mu).dot(nu)
    }

    fn j(&self, mu: &Self::Vector) -> f64 {
        self.j1(mu) - self.j2(mu)
    }

    /// Called when a stepper observes `J₂(μ)` below `-tolerance`, which means
    /// the splitting is not valid at this state. Returning `Ok` makes the
    /// stepper fall back to the pure `L₁` flow for this step.
    fn on_negative_j2(&self, j2: f64) -> Result<()> {
        Err(Error::InvalidSplitting {
            j2,
            hint: "L1*L1 - L2*L2 must be positive semidefinite".into(),
        })
    }
}
