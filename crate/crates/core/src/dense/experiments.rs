use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::expm::expm;
use super::toy::ToyProblem;
use crate::linop::{increased, step, Scheme, SchemeOptions, StepReport};

/// Something that advances the toy problem from `t = 0` to `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyIntegrator {
    Scheme(Scheme),
    /// The matrix-exponential solution sampled at every step; used as a control.
    Exact,
}

impl ToyIntegrator {
    pub fn name(&self) -> &'static str {
        match self {
            ToyIntegrator::Scheme(s) => s.name(),
            ToyIntegrator::Exact => "exact",
        }
    }
}

impl From<Scheme> for ToyIntegrator {
    fn from(s: Scheme) -> Self {
        ToyIntegrator::Scheme(s)
    }
}

/// `count` logarithmically spaced points in `[lo, hi]`, ascending.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && count >= 1);
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Ten log-spaced steps in `[1e-4, 0.2]`.
pub fn default_dt_grid() -> Vec<f64> {
    log_spaced(1e-4, 0.2, 10)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyRow {
    pub scheme: String,
    /// Step actually used, `T / n_steps`.
    pub dt: f64,
    pub n_steps: usize,
    /// `‖u^N − u(T)‖₂`, absent when the run failed.
    pub error: Option<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyResult {
    pub final_time: f64,
    pub rows: Vec<ConsistencyRow>,
    /// Fitted order per integrator; `None` for the exact control or too few points.
    pub slopes: Vec<(String, Option<f64>)>,
}

impl ConsistencyResult {
    pub fn slope(&self, name: &str) -> Option<f64> {
        self.slopes
            .iter()
            .find(|(n, _)| n == name)
            .and_then(|(_, s)| *s)
    }

    /// Errors of one integrator in grid order.
    pub fn errors(&self, name: &str) -> Vec<Option<f64>> {
        self.rows
            .iter()
            .filter(|r| r.scheme == name)
            .map(|r| r.error)
            .collect()
    }
}

fn integrate(
    problem: &ToyProblem,
    integrator: ToyIntegrator,
    dt: f64,
    n_steps: usize,
    opts: &SchemeOptions,
) -> crate::Result<DVector<f64>> {
    match integrator {
        ToyIntegrator::Exact => {
            let propagator = ExactPropagator::new(problem, dt);
            let mut u = problem.u0.clone();
            for _ in 0..n_steps {
                u = propagator.apply(&u);
            }
            Ok(u)
        }
        ToyIntegrator::Scheme(scheme) => {
            let energy = problem.energy();
            let split = problem.split();
            let mut state = problem.initial_state();
            for _ in 0..n_steps {
                state = step(scheme, &state, &energy, &split, dt, opts)?.0;
            }
            Ok(state.u)
        }
    }
}

/// Final-time errors of each integrator on each step size, with fitted orders.
///
/// Each step is adjusted to `T / round(T / δt)` so every run lands exactly on
/// `T`. Failed cells are recorded rather than aborting the table.
pub fn consistency_experiment(
    problem: &ToyProblem,
    integrators: &[ToyIntegrator],
    final_time: f64,
    dt_grid: &[f64],
    opts: &SchemeOptions,
) -> ConsistencyResult {
    let reference = problem.exact_flow(final_time);
    let cells: Vec<(ToyIntegrator, f64)> = integrators
        .iter()
        .flat_map(|&i| dt_grid.iter().map(move |&dt| (i, dt)))
        .collect();
    let rows: Vec<ConsistencyRow> = cells
        .par_iter()
        .map(|&(integrator, dt)| {
            let n_steps = ((final_time / dt).round() as usize).max(1);
            let dt = final_time / n_steps as f64;
            let (error, failure) = match integrate(problem, integrator, dt, n_steps, opts) {
                Ok(u) => (Some((u - &reference).norm()), None),
                Err(e) => (None, Some(e.to_string())),
            };
            ConsistencyRow {
                scheme: integrator.name().to_string(),
                dt,
                n_steps,
                error,
                failure,
            }
        })
        .collect();

    let slopes = integrators
        .iter()
        .map(|i| {
            let slope = match i {
                ToyIntegrator::Exact => None,
                ToyIntegrator::Scheme(_) => {
                    let (x, y): (Vec<f64>, Vec<f64>) = rows
                        .iter()
                        .filter(|r| r.scheme == i.name())
                        .filter_map(|r| r.error.map(|e| (r.dt, e)))
                        .unzip();
                    log_log_slope(&x, &y)
                }
            };
            (i.name().to_string(), slope)
        })
        .collect();

    ConsistencyResult {
        final_time,
        rows,
        slopes,
    }
}

/// `u ↦ u_* + exp(−δt M)(u − u_*)`, the exact one-step map.
struct ExactPropagator {
    star: DVector<f64>,
    map: nalgebra::DMatrix<f64>,
}

impl ExactPropagator {
    fn new(problem: &ToyProblem, dt: f64) -> Self {
        let a = problem.a.matrix();
        let generator = problem.mobility_matrix() * (a.transpose() * a);
        ExactPropagator {
            star: problem.minimiser(),
            map: expm(&(generator * -dt)),
        }
    }

    fn apply(&self, u: &DVector<f64>) -> DVector<f64> {
        &self.star + &self.map * (u - &self.star)
    }
}

/// Counts of steps on which a quantity rose by more than
/// `1e-12 · max(1, |previous|)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncreaseEvents {
    pub energy: usize,
    pub j: usize,
    pub j_tilde: usize,
}

impl IncreaseEvents {
    pub fn count(reports: &[StepReport]) -> Self {
        let mut ev = IncreaseEvents::default();
        for w in reports.windows(2) {
            ev.energy += increased(w[0].e_value, w[1].e_value) as usize;
            ev.j += increased(w[0].j_value, w[1].j_value) as usize;
            ev.j_tilde += increased(w[0].j_tilde_value, w[1].j_tilde_value) as usize;
        }
        ev
    }
}

/// Full trajectory of one scheme at one step size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityTrace {
    pub scheme: String,
    pub dt: f64,
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub exact: Vec<Vec<f64>>,
    /// Reports including the initial state at index 0.
    pub reports: Vec<StepReport>,
    pub events: IncreaseEvents,
    pub clamp_count: usize,
    pub fallback_count: usize,
    pub failure: Option<String>,
}

fn trace(
    problem: &ToyProblem,
    scheme: Scheme,
    final_time: f64,
    dt: f64,
    opts: &SchemeOptions,
) -> StabilityTrace {
    let energy = problem.energy();
    let split = problem.split();
    let n_steps = ((final_time / dt).round() as usize).max(1);
    let exact_step = ExactPropagator::new(problem, dt);

    let mut state = problem.initial_state();
    let mut exact = problem.u0.clone();
    let mut out = StabilityTrace {
        scheme: scheme.name().to_string(),
        dt,
        times: vec![0.0],
        u: vec![state.u.iter().copied().collect()],
        exact: vec![exact.iter().copied().collect()],
        reports: vec![StepReport::of_state(&state, &energy, &split)],
        events: IncreaseEvents::default(),
        clamp_count: 0,
        fallback_count: 0,
        failure: None,
    };
    for n in 1..=n_steps {
        match step(scheme, &state, &energy, &split, dt, opts) {
            Ok((next, report)) => {
                state = next;
                exact = exact_step.apply(&exact);
                out.times.push(n as f64 * dt);
                out.u.push(state.u.iter().copied().collect());
                out.exact.push(exact.iter().copied().collect());
                out.clamp_count += report.r_clamped as usize;
                out.fallback_count += report.fallback_used as usize;
                out.reports.push(report);
            }
            Err(e) => {
                out.failure = Some(format!("step {n}: {e}"));
                break;
            }
        }
    }
    out.events = IncreaseEvents::count(&out.reports);
    out
}

/// Long-time traces of each scheme at each step size.
pub fn stability_experiment(
    problem: &ToyProblem,
    schemes: &[Scheme],
    final_time: f64,
    dts: &[f64],
    opts: &SchemeOptions,
) -> Vec<StabilityTrace> {
    let cells: Vec<(Scheme, f64)> = schemes
        .iter()
        .flat_map(|&s| dts.iter().map(move |&dt| (s, dt)))
        .collect();
    cells
        .par_iter()
        .map(|&(s, dt)| trace(problem, s, final_time, dt, opts))
        .collect()
}
