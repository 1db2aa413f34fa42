use std::fs;
use std::io::Write;
use std::path::Path;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::config::{Experiment, RunConfig};
use crate::ch::{
    ch_step, component_count, diagnostics, initial_condition, ChDiagnostics, ChParams, ChState,
    ChStepInfo, ChTracker,
};
use crate::dense::{consistency_experiment, stability_experiment, ToyIntegrator};
use crate::error::{Error, Result};
use crate::spectral::{write_field, GridSpec};

/// Level of `{u > level}` used for component counts.
pub const PHASE_LEVEL: f64 = 0.5;

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RunSummary {
    ToyConsistency(ConsistencySummary),
    ToyStability(StabilitySummary),
    PhaseField(PhaseFieldSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencySummary {
    pub final_time: f64,
    /// Fitted `log error / log δt` slope per scheme.
    pub slopes: Vec<SchemeSlope>,
    pub failed_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSlope {
    pub scheme: String,
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySummary {
    pub final_time: f64,
    pub traces: Vec<TraceSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub scheme: String,
    pub dt: f64,
    pub steps: usize,
    pub e_increase_events: usize,
    pub j_increase_events: usize,
    pub j_tilde_increase_events: usize,
    pub clamp_count: usize,
    pub fallback_count: usize,
    /// `max |r − √J₂(μ)| / max(1, √J₂(μ))` over the trajectory.
    pub max_r_gap: f64,
    pub final_energy: f64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseFieldSummary {
    pub experiment: Experiment,
    pub scheme: String,
    pub grid: GridSpec,
    pub params: ChParams,
    pub steps_taken: usize,
    pub final_time: f64,
    /// `completed` or `pinch-off`.
    pub stop_reason: String,
    pub initial: ChDiagnostics,
    #[serde(rename = "final")]
    pub last: ChDiagnostics,
    pub relative_mass_drift: f64,
    pub max_mass_drift: f64,
    pub max_overshoot: f64,
    pub p_eps_increase_events: usize,
    pub relaxed_energy_increase_events: usize,
    pub j_tilde_increase_events: usize,
    pub clamp_count: usize,
    pub fallback_count: usize,
    pub components_initial: usize,
    pub components_final: usize,
}

/// Machine-readable record written to `error.json` when a run fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
    pub step: Option<usize>,
    pub exit_code: i32,
}

/// Exit status of the command-line tool for `e`: 2 for configuration
/// problems, 3 for numerical failures.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. }
        | Error::InvalidParameter(_)
        | Error::GridMismatch(_)
        | Error::Json(_)
        | Error::Compare(_) => 2,
        Error::AtStep { source, .. } => exit_code(source),
        _ => 3,
    }
}

impl ErrorRecord {
    pub fn of(e: &Error) -> Self {
        let (kind, step) = match e {
            Error::AtStep { step, source } => (error_kind(source), Some(*step)),
            Error::MonitorAbort { step, .. } => ("monitor-abort", Some(*step)),
            other => (error_kind(other), None),
        };
        ErrorRecord {
            kind: kind.to_string(),
            message: e.to_string(),
            step,
            exit_code: exit_code(e),
        }
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::SingularUpdate { .. } => "singular-update",
        Error::SingularMatrix { .. } => "singular-matrix",
        Error::IllPosedSymbol { .. } => "ill-posed-symbol",
        Error::GridMismatch(_) => "grid-mismatch",
        Error::NonFinite(_) => "non-finite",
        Error::InvalidSplitting { .. } => "invalid-splitting",
        Error::InvalidParameter(_) => "invalid-parameter",
        Error::Config { .. } => "config",
        Error::AtStep { source, .. } => error_kind(source),
        Error::MonitorAbort { .. } => "monitor-abort",
        Error::Compare(_) => "compare",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::Csv(_) => "csv",
    }
}

/// Runs `config`, writing artifacts into its output directory. On failure an
/// `error.json` is written there too (when the directory is usable) and the
/// error is returned.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    let dir = config.output_dir();
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), config.to_json())?;
    let _ = fs::remove_file(dir.join("error.json"));
    let outcome = match config.experiment {
        Experiment::ToyConsistency => run_consistency(config, dir),
        Experiment::ToyStability => run_stability(config, dir),
        _ => run_phase_field(config, dir),
    };
    match outcome {
        Ok(summary) => {
            write_json(&dir.join("summary.json"), &summary)?;
            Ok(summary)
        }
        Err(e) => {
            if let Err(io) = write_json(&dir.join("error.json"), &ErrorRecord::of(&e)) {
                warn!("could not write error.json: {io}");
            }
            Err(e)
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// 17 significant digits, enough to round-trip an `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn run_consistency(config: &RunConfig, dir: &Path) -> Result<RunSummary> {
    let problem = config.toy_problem()?;
    let integrators: Vec<ToyIntegrator> =
        config.generic_schemes().into_iter().map(ToyIntegrator::from).collect();
    let t = config.final_time.unwrap_or(5.0);
    let dts = config.dt_grid.clone().unwrap_or_default();
    let result = consistency_experiment(&problem, &integrators, t, &dts, &config.scheme_options());

    let mut w = csv::Writer::from_path(dir.join("consistency.csv"))?;
    w.write_record(["scheme", "dt", "n_steps", "error", "failure"])?;
    for row in &result.rows {
        w.write_record([
            row.scheme.clone(),
            num(row.dt),
            row.n_steps.to_string(),
            row.error.map(num).unwrap_or_else(|| "NaN".into()),
            row.failure.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;

    Ok(RunSummary::ToyConsistency(ConsistencySummary {
        final_time: result.final_time,
        slopes: result
            .slopes
            .iter()
            .map(|(scheme, slope)| SchemeSlope {
                scheme: scheme.clone(),
                slope: *slope,
            })
            .collect(),
        failed_cells: result.rows.iter().filter(|r| r.failure.is_some()).count(),
    }))
}

fn run_stability(config: &RunConfig, dir: &Path) -> Result<RunSummary> {
    let problem = config.toy_problem()?;
    let t = config.final_time.unwrap_or(200.0);
    let dts = config.dt_grid.clone().unwrap_or_default();
    let traces = stability_experiment(
        &problem,
        &config.generic_schemes(),
        t,
        &dts,
        &config.scheme_options(),
    );

    let mut w = csv::Writer::from_path(dir.join("stability.csv"))?;
    w.write_record([
        "scheme", "dt", "step", "time", "E", "J", "J_tilde", "r", "r_exact", "fallback_used", "r_clamped",
    ])?;
    let mut summaries = Vec::with_capacity(traces.len());
    for tr in &traces {
        for (k, (time, rep)) in tr.times.iter().zip(&tr.reports).enumerate() {
            w.write_record([
                tr.scheme.clone(),
                num(tr.dt),
                k.to_string(),
                num(*time),
                num(rep.e_value),
                num(rep.j_value),
                num(rep.j_tilde_value),
                num(rep.r_value),
                num(rep.r_exact),
                (rep.fallback_used as u8).to_string(),
                (rep.r_clamped as u8).to_string(),
            ])?;
        }
        let max_r_gap = tr
            .reports
            .iter()
            .map(|r| (r.r_value - r.r_exact).abs() / r.r_exact.max(1.0))
            .fold(0.0, f64::max);
        summaries.push(TraceSummary {
            scheme: tr.scheme.clone(),
            dt: tr.dt,
            steps: tr.reports.len().saturating_sub(1),
            e_increase_events: tr.events.energy,
            j_increase_events: tr.events.j,
            j_tilde_increase_events: tr.events.j_tilde,
            clamp_count: tr.clamp_count,
            fallback_count: tr.fallback_count,
            max_r_gap,
            final_energy: tr.reports.last().map(|r| r.e_value).unwrap_or(f64::NAN),
            failure: tr.failure.clone(),
        });
    }
    w.flush()?;
    Ok(RunSummary::ToyStability(StabilitySummary {
        final_time: t,
        traces: summaries,
    }))
}

/// Column order of `diagnostics.csv`.
pub const DIAGNOSTIC_COLUMNS: [&str; 14] = [
    "step",
    "time",
    "P_eps",
    "J",
    "J_tilde",
    "r",
    "r_exact",
    "mass",
    "overshoot",
    "fallback_used",
    "r_clamped",
    "relaxed_energy",
    "min_u",
    "max_u",
];

fn diagnostic_row(step: usize, time: f64, d: &ChDiagnostics, info: &ChStepInfo) -> Vec<String> {
    vec![
        step.to_string(),
        num(time),
        num(d.p_eps),
        num(info.j),
        num(info.j_tilde),
        num(d.r),
        num(d.r_exact),
        num(d.mass),
        num(d.overshoot),
        (info.fallback_used as u8).to_string(),
        (info.r_clamped as u8).to_string(),
        num(d.relaxed_energy),
        num(d.min_u),
        num(d.max_u),
    ]
}

fn run_phase_field(config: &RunConfig, dir: &Path) -> Result<RunSummary> {
    let scheme = config
        .ch_scheme()
        .ok_or_else(|| Error::InvalidParameter("phase-field run without a stepper".into()))?;
    let grid = config
        .grid
        .ok_or_else(|| Error::InvalidParameter("phase-field run without a grid".into()))?;
    let shape = config
        .shape
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("phase-field run without a shape".into()))?;
    let p = config.ch_params()?;
    let n_steps = config.n_steps.unwrap_or(0);
    let snapshot_every = config.snapshot_every.unwrap_or(0);
    let stop_on_pinch = config.stop_on_pinch_off.unwrap_or(false);
    let check_every = config.pinch_check_every.unwrap_or(10).max(1);
    for w in p.warnings() {
        warn!("{w}");
    }

    let sp = p.spectral(grid);
    let u0 = initial_condition(shape, grid, p.eps)?;
    let mut state = ChState::initial(&sp, u0, &p, scheme)?;
    let d0 = diagnostics(&sp, &state, &p, scheme)?;
    let mut tracker = ChTracker::new(d0);
    let components_initial = component_count(&state.u, PHASE_LEVEL);
    let mut components = components_initial;
    info!(
        "{} with {scheme} on {grid}: eps = {:.4e}, dt = {:.4e}, {n_steps} steps",
        config.experiment, p.eps, p.dt
    );

    let mut w = csv::Writer::from_path(dir.join("diagnostics.csv"))?;
    w.write_record(DIAGNOSTIC_COLUMNS)?;
    let nan_info = ChStepInfo {
        j: f64::NAN,
        j_tilde: f64::NAN,
        ..ChStepInfo::default()
    };
    w.write_record(diagnostic_row(0, 0.0, &d0, &nan_info))?;
    let snapshot = |state: &ChState| -> Result<()> {
        write_field(dir, &format!("u_{:06}", state.step), &state.u, state.time, state.step)?;
        Ok(())
    };
    if snapshot_every > 0 {
        snapshot(&state)?;
    }

    let mut stop_reason = "completed";
    let report_every = (n_steps / 20).max(1);
    for k in 1..=n_steps {
        let (next, step_info) = ch_step(scheme, &sp, &state, &p).map_err(|e| Error::AtStep {
            step: k,
            source: Box::new(e),
        })?;
        state = next;
        let d = diagnostics(&sp, &state, &p, scheme)?;
        if tracker.record(&d, &step_info) {
            warn!("step {k}: P_eps increased to {:.10e}", d.p_eps);
        }
        w.write_record(diagnostic_row(k, state.time, &d, &step_info))?;
        if snapshot_every > 0 && k % snapshot_every == 0 {
            snapshot(&state)?;
        }
        if k % report_every == 0 {
            info!("step {k}: P_eps = {:.8e}, overshoot = {:.3e}", d.p_eps, d.overshoot);
        }
        if stop_on_pinch && (k % check_every == 0 || k == n_steps) {
            components = component_count(&state.u, PHASE_LEVEL);
            if components > components_initial {
                info!("step {k}: {components_initial} -> {components} components, stopping");
                stop_reason = "pinch-off";
                break;
            }
        }
    }
    w.flush()?;
    if snapshot_every > 0 && state.step % snapshot_every != 0 {
        snapshot(&state)?;
    }
    if !stop_on_pinch {
        components = component_count(&state.u, PHASE_LEVEL);
    }

    Ok(RunSummary::PhaseField(PhaseFieldSummary {
        experiment: config.experiment,
        scheme: scheme.to_string(),
        grid,
        params: p,
        steps_taken: state.step,
        final_time: state.time,
        stop_reason: stop_reason.to_string(),
        initial: tracker.initial,
        last: tracker.last,
        relative_mass_drift: tracker.relative_mass_drift(),
        max_mass_drift: tracker.max_mass_drift,
        max_overshoot: tracker.max_overshoot,
        p_eps_increase_events: tracker.p_eps_increases,
        relaxed_energy_increase_events: tracker.relaxed_energy_increases,
        j_tilde_increase_events: tracker.j_tilde_increases,
        clamp_count: tracker.clamp_count,
        fallback_count: tracker.fallback_count,
        components_initial,
        components_final: components,
    }))
}

/// Writes `summary` as pretty JSON to `out`.
pub fn print_summary(summary: &RunSummary, mut out: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, summary)?;
    writeln!(out)?;
    Ok(())
}
