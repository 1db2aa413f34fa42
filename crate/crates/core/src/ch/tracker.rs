use serde::{Deserialize, Serialize};

use super::{ChDiagnostics, ChStepInfo};
use crate::linop::increased;

/// Running counters over the per-step diagnostics of a Cahn-Hilliard run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChTracker {
    pub initial: ChDiagnostics,
    pub last: ChDiagnostics,
    pub steps: usize,
    pub p_eps_increases: usize,
    /// Increases of `½∫|∇u|² + r²/ε²`, the quantity the classic SAV scheme
    /// dissipates.
    pub relaxed_energy_increases: usize,
    pub j_tilde_increases: usize,
    pub clamp_count: usize,
    pub fallback_count: usize,
    pub max_overshoot: f64,
    /// Largest `|∫u − ∫u⁰|` seen so far.
    pub max_mass_drift: f64,
    #[serde(skip)]
    last_j_tilde: Option<f64>,
}

impl ChTracker {
    pub fn new(initial: ChDiagnostics) -> Self {
        ChTracker {
            initial,
            last: initial,
            steps: 0,
            p_eps_increases: 0,
            relaxed_energy_increases: 0,
            j_tilde_increases: 0,
            clamp_count: 0,
            fallback_count: 0,
            max_overshoot: initial.overshoot,
            max_mass_drift: 0.0,
            last_j_tilde: None,
        }
    }

    /// Folds in the diagnostics after one step. Returns whether `P_ε` increased.
    pub fn record(&mut self, d: &ChDiagnostics, info: &ChStepInfo) -> bool {
        let p_up = increased(self.last.p_eps, d.p_eps);
        self.p_eps_increases += p_up as usize;
        self.relaxed_energy_increases +=
            increased(self.last.relaxed_energy, d.relaxed_energy) as usize;
        if info.j_tilde.is_finite() {
            if let Some(prev) = self.last_j_tilde {
                self.j_tilde_increases += increased(prev, info.j_tilde) as usize;
            }
            self.last_j_tilde = Some(info.j_tilde);
        }
        self.clamp_count += info.r_clamped as usize;
        self.fallback_count += info.fallback_used as usize;
        self.max_overshoot = self.max_overshoot.max(d.overshoot);
        self.max_mass_drift = self.max_mass_drift.max((d.mass - self.initial.mass).abs());
        self.last = *d;
        self.steps += 1;
        p_up
    }

    /// `(∫u − ∫u⁰)/|∫u⁰|` at the last recorded step.
    pub fn relative_mass_drift(&self) -> f64 {
        (self.last.mass - self.initial.mass) / self.initial.mass.abs()
    }
}
