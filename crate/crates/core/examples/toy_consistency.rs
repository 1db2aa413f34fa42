//! Final-time error against the exact solution for every scheme on the 2×2
//! toy problem, with fitted convergence orders.

use mobsav::dense::{consistency_experiment, default_dt_grid, ToyIntegrator, ToyProblem};
use mobsav::linop::{Scheme, SchemeOptions};

fn main() {
    let problem = ToyProblem::default();
    let integrators: Vec<ToyIntegrator> = Scheme::ALL.iter().map(|&s| s.into()).collect();
    let result = consistency_experiment(
        &problem,
        &integrators,
        5.0,
        &default_dt_grid(),
        &SchemeOptions::default(),
    );

    println!("{:<12} {:>12} {:>8} {:>14}", "scheme", "dt", "steps", "error");
    for row in &result.rows {
        let err = row
            .error
            .map(|e| format!("{e:.6e}"))
            .unwrap_or_else(|| row.failure.clone().unwrap_or_default());
        println!("{:<12} {:>12.4e} {:>8} {:>14}", row.scheme, row.dt, row.n_steps, err);
    }
    println!();
    for (name, slope) in &result.slopes {
        match slope {
            Some(s) => println!("{name:<12} order {s:.3}"),
            None => println!("{name:<12} order n/a"),
        }
    }
}
