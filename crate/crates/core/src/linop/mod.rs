//! Quadratic energies, split mobilities, and the generic time steppers.

mod flow;
mod schemes;
mod space;
mod traits;

pub use flow::{
    increased, run_flow, EnergyDecay, Monitor, RelaxedMobilityDecay, Trajectory, INCREASE_TOL,
};
pub use schemes::{
    cvx_split_step, mb_sav1_plus_step, mb_sav1_step, mb_sav2_plus_step, mb_sav2_step,
    mb_sav2_step_with_prediction, step, Predictor, SavState, Scheme, SchemeOptions, StepReport,
    SINGULAR_DENOMINATOR,
};
pub use space::VectorSpace;
pub use traits::{MobilitySplit, QuadraticEnergy};
