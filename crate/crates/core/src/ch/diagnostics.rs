use serde::{Deserialize, Serialize};

use super::energy::{energy_p_eps, relaxed_energy};
use super::steppers::{exact_r, ChScheme, ChState};
use super::ChParams;
use crate::error::Result;
use crate::spectral::{RealField, Spectral};

/// Scalar observables of a phase field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChDiagnostics {
    pub p_eps: f64,
    /// `½∫|∇u|² + r²/ε²`; only meaningful for the classic SAV scheme.
    pub relaxed_energy: f64,
    pub mass: f64,
    /// `J₂` of the scheme's model, frozen at `u`; `∫W + c0` for classic SAV.
    pub j2: f64,
    pub r: f64,
    pub r_exact: f64,
    pub min_u: f64,
    pub max_u: f64,
    /// `max(max u − 1, −min u)`.
    pub overshoot: f64,
}

/// `max(max u − 1, −min u)`.
pub fn overshoot(u: &RealField) -> f64 {
    (u.max() - 1.0).max(-u.min())
}

pub fn diagnostics(
    sp: &Spectral,
    state: &ChState,
    p: &ChParams,
    scheme: ChScheme,
) -> Result<ChDiagnostics> {
    let r_exact = exact_r(sp, scheme, &state.u, &state.mu, p);
    Ok(ChDiagnostics {
        p_eps: energy_p_eps(sp, &state.u, p.eps)?,
        relaxed_energy: relaxed_energy(sp, &state.u, state.r, p.eps)?,
        mass: state.u.integral(),
        j2: r_exact * r_exact,
        r: state.r,
        r_exact,
        min_u: state.u.min(),
        max_u: state.u.max(),
        overshoot: overshoot(&state.u),
    })
}
