//! Cahn-Hilliard models on periodic grids: potentials, linearised energies,
//! mobility splittings, steppers, initial shapes and diagnostics.

mod diagnostics;
mod energy;
mod mobility;
mod params;
pub mod potential;
mod shapes;
mod steppers;
mod tracker;

pub use diagnostics::{diagnostics, overshoot, ChDiagnostics};
pub use energy::{energy_p_eps, relaxed_energy, LinearizedChEnergy};
pub use mobility::{MchSplit, NmnSplit};
pub use params::ChParams;
pub use shapes::{component_count, initial_condition, profile_slice, Shape};
pub use steppers::{
    ch_step, chemical_potential, eyre_step, exact_r, mch_sav1_step, nmn_sav1_step,
    sav_classic_step, ChScheme, ChState, ChStepInfo,
};
pub use tracker::ChTracker;
