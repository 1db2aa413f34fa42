use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::energy::LinearizedChEnergy;
use super::mobility::{MchSplit, NmnSplit};
use super::potential::{w, w_prime};
use super::ChParams;
use crate::error::{Error, Result};
use crate::linop::{
    mb_sav1_plus_step, MobilitySplit, SavState, SchemeOptions, StepReport, VectorSpace,
    SINGULAR_DENOMINATOR,
};
use crate::spectral::{DiagonalSymbol, RealField, Spectral};

/// The four Cahn-Hilliard steppers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChScheme {
    /// Convex-concave splitting, constant mobility.
    Eyre,
    /// Energy-SAV on `∫W`, constant mobility.
    SavClassic,
    /// Mobility-relaxed SAV with `M(s) = 36s²(1−s)²`.
    MchSav1,
    /// Mobility-relaxed SAV for the `N M N` model.
    NmnSav1,
}

impl ChScheme {
    pub const ALL: [ChScheme; 4] = [
        ChScheme::Eyre,
        ChScheme::SavClassic,
        ChScheme::MchSav1,
        ChScheme::NmnSav1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ChScheme::Eyre => "eyre",
            ChScheme::SavClassic => "savclassic",
            ChScheme::MchSav1 => "mchsav1",
            ChScheme::NmnSav1 => "nmnsav1",
        }
    }

    /// Whether the stepper preserves `∫u` exactly.
    pub fn conserves_mass(&self) -> bool {
        !matches!(self, ChScheme::NmnSav1)
    }
}

impl fmt::Display for ChScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ChScheme::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown Cahn-Hilliard scheme `{s}`")))
    }
}

/// `(uⁿ, μⁿ, rⁿ)` at time `tₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChState {
    pub u: RealField,
    pub mu: RealField,
    pub r: f64,
    pub time: f64,
    pub step: usize,
}

/// Flags and scalars of one step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ChStepInfo {
    pub fallback_used: bool,
    pub r_clamped: bool,
    /// `J_n(μⁿ⁺¹)` for the mobility-relaxed steppers, NaN otherwise.
    pub j: f64,
    /// `J₁(μⁿ⁺¹) − (rⁿ⁺¹)²`, NaN when there is no relaxed mobility.
    pub j_tilde: f64,
}

/// `μ = −Δu + W'(u)/ε²`.
pub fn chemical_potential(sp: &Spectral, u: &RealField, eps: f64) -> Result<RealField> {
    let mut mu = sp.laplacian(u)?;
    mu.scale_mut(-1.0);
    mu.axpy(1.0 / (eps * eps), &u.map(w_prime));
    Ok(mu)
}

/// `√J₂(μ)` of the chosen model with mobilities frozen at `u`; `√(∫W(u) + c0)`
/// for the classic SAV scheme and 0 for Eyre.
pub fn exact_r(sp: &Spectral, scheme: ChScheme, u: &RealField, mu: &RealField, p: &ChParams) -> f64 {
    match scheme {
        ChScheme::Eyre => 0.0,
        ChScheme::SavClassic => (u.map(w).integral() + p.c0).sqrt(),
        ChScheme::MchSav1 => MchSplit::new(sp, u, p).j2(mu).max(0.0).sqrt(),
        ChScheme::NmnSav1 => NmnSplit::new(sp, u, p).j2(mu).max(0.0).sqrt(),
    }
}

impl ChState {
    /// `μ⁰ = −Δu⁰ + W'(u⁰)/ε²` and `r⁰` from [`exact_r`].
    pub fn initial(sp: &Spectral, u0: RealField, p: &ChParams, scheme: ChScheme) -> Result<Self> {
        sp.grid().check_same(u0.grid())?;
        let mu = chemical_potential(sp, &u0, p.eps)?;
        let r = exact_r(sp, scheme, &u0, &mu, p);
        Ok(ChState {
            u: u0,
            mu,
            r,
            time: 0.0,
            step: 0,
        })
    }

    fn advanced(&self, u: RealField, mu: RealField, r: f64, dt: f64) -> Result<ChState> {
        if !u.is_finite() || !mu.is_finite() {
            return Err(Error::NonFinite("Cahn-Hilliard update"));
        }
        Ok(ChState {
            u,
            mu,
            r,
            time: self.time + dt,
            step: self.step + 1,
        })
    }
}

/// One convex-concave step:
/// `uⁿ⁺¹ = L̂[uⁿ + δt Δ(W'(uⁿ)/ε² − (α/ε²)uⁿ)]` with
/// `L̂ = 1/(1 + δt|k|²(|k|² + α/ε²))`.
pub fn eyre_step(sp: &Spectral, state: &ChState, p: &ChParams) -> Result<ChState> {
    let c = p.alpha_over_eps2;
    let inv_eps2 = 1.0 / (p.eps * p.eps);
    let k2 = DiagonalSymbol::k2(*sp.grid());
    let s1 = k2.scaled(p.dt);
    let s2 = k2.map(|k| -(k + c));
    let rhs_mu = state.u.map(|s| w_prime(s) * inv_eps2 - c * s);
    let (u, mu) = sp.block_solve(&s1, &s2, &state.u, &rhs_mu)?;
    state.advanced(u, mu, 0.0, p.dt)
}

/// One classic SAV step with `r ≈ √(∫W(u) + c0)`.
pub fn sav_classic_step(sp: &Spectral, state: &ChState, p: &ChParams) -> Result<ChState> {
    let inv_eps2 = 1.0 / (p.eps * p.eps);
    let sq = (state.u.map(w).integral() + p.c0).sqrt();
    if !(sq > 0.0) {
        return Err(Error::SingularUpdate {
            quantity: "sqrt(int W(u) + c0)",
            value: sq,
        });
    }
    let wp = state.u.map(w_prime);
    let h = |v: &RealField| wp.dot(v) / (2.0 * sq);

    let k2 = DiagonalSymbol::k2(*sp.grid());
    let s1 = k2.scaled(p.dt);
    let s2 = k2.scaled(-1.0);
    let zero = RealField::zeros(*sp.grid());
    let (u1, mu1) = sp.block_solve(&s1, &s2, &state.u, &zero)?;
    let (u2, mu2) = sp.block_solve(&s1, &s2, &zero, &wp.map(|v| v * inv_eps2 / sq))?;

    let den = 1.0 - h(&u2);
    if den.abs() <= SINGULAR_DENOMINATOR {
        return Err(Error::SingularUpdate {
            quantity: "1 - h(u_2)",
            value: den,
        });
    }
    let r = (state.r - h(&state.u) + h(&u1)) / den;
    let u = u1.plus_scaled(r, &u2);
    let mu = mu1.plus_scaled(r, &mu2);
    state.advanced(u, mu, r, p.dt)
}

fn options(p: &ChParams) -> SchemeOptions {
    SchemeOptions {
        clamp: p.clamp_r,
        c0: p.c0,
        j2_floor: None,
    }
}

fn relaxed_step<M>(
    state: &ChState,
    energy: &LinearizedChEnergy<'_>,
    split: &M,
    p: &ChParams,
) -> Result<(ChState, StepReport)>
where
    M: MobilitySplit<Vector = RealField, Kernel = DiagonalSymbol>,
{
    let sav = SavState {
        u: state.u.clone(),
        mu: state.mu.clone(),
        r: state.r,
        step_index: state.step,
        r_clamped: false,
    };
    let (next, report) = mb_sav1_plus_step(&sav, energy, split, p.dt, &options(p))?;
    Ok((state.advanced(next.u, next.mu, next.r, p.dt)?, report))
}

/// One mobility-relaxed step of the degenerate-mobility model, with the
/// linearised energy and the mobility frozen at `uⁿ`.
pub fn mch_sav1_step(sp: &Spectral, state: &ChState, p: &ChParams) -> Result<(ChState, StepReport)> {
    let energy = LinearizedChEnergy::new(sp, &state.u, p);
    let split = MchSplit::new(sp, &state.u, p);
    relaxed_step(state, &energy, &split, p)
}

/// One mobility-relaxed step of the `N M N` model.
pub fn nmn_sav1_step(sp: &Spectral, state: &ChState, p: &ChParams) -> Result<(ChState, StepReport)> {
    let energy = LinearizedChEnergy::new(sp, &state.u, p);
    let split = NmnSplit::new(sp, &state.u, p);
    relaxed_step(state, &energy, &split, p)
}

/// Dispatches one step of `scheme`.
pub fn ch_step(
    scheme: ChScheme,
    sp: &Spectral,
    state: &ChState,
    p: &ChParams,
) -> Result<(ChState, ChStepInfo)> {
    let nan_info = ChStepInfo {
        j: f64::NAN,
        j_tilde: f64::NAN,
        ..ChStepInfo::default()
    };
    match scheme {
        ChScheme::Eyre => Ok((eyre_step(sp, state, p)?, nan_info)),
        ChScheme::SavClassic => Ok((sav_classic_step(sp, state, p)?, nan_info)),
        ChScheme::MchSav1 | ChScheme::NmnSav1 => {
            let (next, rep) = if scheme == ChScheme::MchSav1 {
                mch_sav1_step(sp, state, p)?
            } else {
                nmn_sav1_step(sp, state, p)?
            };
            let info = ChStepInfo {
                fallback_used: rep.fallback_used,
                r_clamped: rep.r_clamped,
                j: rep.j_value,
                j_tilde: rep.j_tilde_value,
            };
            Ok((next, info))
        }
    }
}
