//! Run configuration, experiment presets, the run driver and the output
//! formats (`diagnostics.csv`, `summary.json`, field snapshots).

mod compare;
mod config;
mod runner;

pub use compare::{compare, compare_tables, delta, Comparison, DiagnosticsTable};
pub use config::{
    load_config, parse_config, Experiment, ParamSpec, RunConfig, SchemeName, PRESET_M,
};
pub use runner::{
    exit_code, print_summary, run, ConsistencySummary, ErrorRecord, PhaseFieldSummary,
    RunSummary, SchemeSlope, StabilitySummary, TraceSummary, DIAGNOSTIC_COLUMNS, PHASE_LEVEL,
};

use crate::error::Result;

/// Every experiment preset with its defaults filled in.
pub fn presets() -> Result<Vec<RunConfig>> {
    Experiment::ALL
        .into_iter()
        .filter(|e| *e != Experiment::Custom)
        .map(RunConfig::preset)
        .collect()
}
