//! Relaxes a disk under one of the Cahn-Hilliard steppers and prints the
//! energy, mass and overshoot along the way.
//!
//! Usage: `disk_relaxation [scheme] [N] [steps] [m]`, defaulting to
//! `nmnsav1 128 500 2.25`.

use mobsav::ch::{ch_step, diagnostics, initial_condition, ChParams, ChScheme, ChState, Shape};
use mobsav::linop::increased;
use mobsav::spectral::GridSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scheme: ChScheme = args.first().map(|s| s.parse()).transpose()?.unwrap_or(ChScheme::NmnSav1);
    let n: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(128);
    let steps: usize = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(500);
    let m: f64 = args.get(3).map(|s| s.parse()).transpose()?.unwrap_or(2.25);

    let grid = GridSpec::cube(2, n)?;
    let eps = 2.0 / n as f64;
    let mut params = ChParams::scaled(eps, m);
    params.dealias = scheme == ChScheme::NmnSav1;
    let sp = params.spectral(grid);
    let shape = Shape::Disk {
        center: vec![0.5, 0.5],
        radius: 0.25,
    };
    let u0 = initial_condition(&shape, grid, eps)?;
    let mut state = ChState::initial(&sp, u0, &params, scheme)?;
    let d0 = diagnostics(&sp, &state, &params, scheme)?;

    println!("{scheme} on {grid}, eps = {eps:.4e}, dt = {:.3e}, m = {m}", params.dt);
    println!("{:>6} {:>14} {:>14} {:>11} {:>10} {:>10}", "step", "P_eps", "mass drift", "overshoot", "r", "r_exact");
    let report_every = (steps / 10).max(1);
    let (mut increases, mut fallbacks, mut clamps) = (0, 0, 0);
    let mut prev = d0.p_eps;
    for k in 1..=steps {
        let (next, info) = ch_step(scheme, &sp, &state, &params)?;
        state = next;
        let d = diagnostics(&sp, &state, &params, scheme)?;
        increases += increased(prev, d.p_eps) as usize;
        prev = d.p_eps;
        fallbacks += info.fallback_used as usize;
        clamps += info.r_clamped as usize;
        if k % report_every == 0 || k == steps {
            println!(
                "{:>6} {:>14.8e} {:>14.3e} {:>11.3e} {:>10.4e} {:>10.4e}",
                k, d.p_eps, d.mass - d0.mass, d.overshoot, d.r, d.r_exact
            );
        }
    }
    println!("P_eps increases: {increases}, fallbacks: {fallbacks}, clamps: {clamps}");
    Ok(())
}
