//! Long-time behaviour of every scheme on the 2×2 toy problem: monotonicity
//! of E, J and J̃, and how closely r follows √J₂(μ).

use mobsav::dense::{stability_experiment, ToyProblem};
use mobsav::linop::{Scheme, SchemeOptions};

fn main() {
    let problem = ToyProblem::default();
    let traces = stability_experiment(
        &problem,
        &Scheme::ALL,
        200.0,
        &[0.1, 1.0, 4.0],
        &SchemeOptions::default(),
    );

    println!(
        "{:<11} {:>5} {:>6} {:>6} {:>6} {:>7} {:>12} {:>12}",
        "scheme", "dt", "E-inc", "J-inc", "J~-inc", "clamps", "max r-gap", "E(T)"
    );
    for t in &traces {
        let gap = t
            .reports
            .iter()
            .map(|r| (r.r_value - r.r_exact).abs() / r.r_exact.max(1.0))
            .fold(0.0, f64::max);
        let e_final = t.reports.last().map(|r| r.e_value).unwrap_or(f64::NAN);
        println!(
            "{:<11} {:>5} {:>6} {:>6} {:>6} {:>7} {:>12.3e} {:>12.3e}",
            t.scheme, t.dt, t.events.energy, t.events.j, t.events.j_tilde, t.clamp_count, gap, e_final
        );
        if let Some(f) = &t.failure {
            println!("    failed: {f}");
        }
    }
}
