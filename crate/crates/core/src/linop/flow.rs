use super::schemes::{step, Scheme, SchemeOptions};
use super::{MobilitySplit, QuadraticEnergy, SavState, StepReport, VectorSpace};
use crate::error::{Error, Result};

/// Observer invoked after every step of [`run_flow`]. Returning `Err` aborts
/// the flow with [`Error::MonitorAbort`].
pub trait Monitor<V> {
    fn observe(
        &mut self,
        prev: &SavState<V>,
        prev_report: &StepReport,
        next: &SavState<V>,
        report: &StepReport,
    ) -> Result<(), String>;
}

impl<V, F> Monitor<V> for F
where
    F: FnMut(&SavState<V>, &StepReport, &SavState<V>, &StepReport) -> Result<(), String>,
{
    fn observe(
        &mut self,
        prev: &SavState<V>,
        prev_report: &StepReport,
        next: &SavState<V>,
        report: &StepReport,
    ) -> Result<(), String> {
        self(prev, prev_report, next, report)
    }
}

/// Relative tolerance of [`increased`].
pub const INCREASE_TOL: f64 = 1e-12;

/// Whether `next` exceeds `prev` by more than `INCREASE_TOL · max(1, |prev|)`.
pub fn increased(prev: f64, next: f64) -> bool {
    next > prev + INCREASE_TOL * prev.abs().max(1.0)
}

/// Aborts when `E` increases by more than `rel_tol · max(1, |E|)`.
#[derive(Debug, Clone, Copy)]
pub struct EnergyDecay {
    pub rel_tol: f64,
}

impl<V> Monitor<V> for EnergyDecay {
    fn observe(
        &mut self,
        _: &SavState<V>,
        prev: &StepReport,
        _: &SavState<V>,
        next: &StepReport,
    ) -> Result<(), String> {
        if next.e_value > prev.e_value + self.rel_tol * prev.e_value.abs().max(1.0) {
            Err(format!("E increased from {:e} to {:e}", prev.e_value, next.e_value))
        } else {
            Ok(())
        }
    }
}

/// Aborts when `J̃` increases by more than `rel_tol · max(1, |J̃|)`.
#[derive(Debug, Clone, Copy)]
pub struct RelaxedMobilityDecay {
    pub rel_tol: f64,
}

impl<V> Monitor<V> for RelaxedMobilityDecay {
    fn observe(
        &mut self,
        _: &SavState<V>,
        prev: &StepReport,
        _: &SavState<V>,
        next: &StepReport,
    ) -> Result<(), String> {
        let (a, b) = (prev.j_tilde_value, next.j_tilde_value);
        if b > a + self.rel_tol * a.abs().max(1.0) {
            Err(format!("J~ increased from {a:e} to {b:e}"))
        } else {
            Ok(())
        }
    }
}

/// Output of [`run_flow`].
#[derive(Debug, Clone)]
pub struct Trajectory<V> {
    /// Observables of the initial state.
    pub initial: StepReport,
    /// One report per step.
    pub reports: Vec<StepReport>,
    pub final_state: SavState<V>,
}

impl<V> Trajectory<V> {
    /// Initial report followed by the per-step reports.
    pub fn all_reports(&self) -> impl Iterator<Item = &StepReport> {
        std::iter::once(&self.initial).chain(self.reports.iter())
    }
}

/// Iterates `scheme` for `n_steps` steps from `initial`.
pub fn run_flow<E, M, V, K>(
    initial: SavState<V>,
    energy: &E,
    split: &M,
    dt: f64,
    n_steps: usize,
    scheme: Scheme,
    opts: &SchemeOptions,
    monitors: &mut [&mut dyn Monitor<V>],
) -> Result<Trajectory<V>>
where
    V: VectorSpace,
    E: QuadraticEnergy<Vector = V, Kernel = K>,
    M: MobilitySplit<Vector = V, Kernel = K>,
    K: ?Sized,
{
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
    }
    let initial_report = StepReport::of_state(&initial, energy, split);
    let mut reports = Vec::with_capacity(n_steps);
    let mut state = initial;
    let mut prev_report = initial_report;
    for n in 0..n_steps {
        let (next, report) = step(scheme, &state, energy, split, dt, opts).map_err(|e| {
            Error::AtStep {
                step: n,
                source: Box::new(e),
            }
        })?;
        for m in monitors.iter_mut() {
            m.observe(&state, &prev_report, &next, &report)
                .map_err(|reason| Error::MonitorAbort { step: n, reason })?;
        }
        prev_report = report;
        reports.push(report);
        state = next;
    }
    Ok(Trajectory {
        initial: initial_report,
        reports,
        final_state: state,
    })
}
