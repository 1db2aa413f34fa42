//! Dense small-dimensional instantiation of the generic schemes.

mod experiments;
mod expm;
mod operator;
mod toy;

pub use experiments::{
    consistency_experiment, default_dt_grid, log_log_slope, log_spaced, stability_experiment,
    ConsistencyResult, ConsistencyRow, IncreaseEvents, StabilityTrace, ToyIntegrator,
};
pub use expm::expm;
pub use operator::{dense_block_solve, DenseEnergy, DenseOperator, DenseSplit};
pub use toy::{ToyProblem, ToySpec};
