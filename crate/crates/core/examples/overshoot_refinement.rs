//! Overshoot of the degenerate-mobility and N M N models on a relaxing disk
//! as the interface width shrinks with the grid.
//!
//! Usage: `overshoot_refinement [N...]`, defaulting to `64 128`. The horizon
//! is 64 steps of the coarsest level; finer levels take `(N/N₀)⁴` times as
//! many steps.

use mobsav::ch::{ch_step, diagnostics, initial_condition, ChParams, ChScheme, ChState, ChTracker, Shape};
use mobsav::dense::log_log_slope;
use mobsav::spectral::GridSpec;

fn max_overshoot(n: usize, scheme: ChScheme, horizon: f64) -> Result<(f64, f64), Box<dyn std::error::Error>> {
    let grid = GridSpec::cube(2, n)?;
    let eps = 2.0 / n as f64;
    let mut p = ChParams::scaled(eps, 2.25);
    p.dealias = true;
    let sp = p.spectral(grid);
    let shape = Shape::Disk {
        center: vec![0.5, 0.5],
        radius: 0.25,
    };
    let mut state = ChState::initial(&sp, initial_condition(&shape, grid, eps)?, &p, scheme)?;
    let mut tracker = ChTracker::new(diagnostics(&sp, &state, &p, scheme)?);
    let steps = (horizon / p.dt).round() as usize;
    for _ in 0..steps {
        let (next, info) = ch_step(scheme, &sp, &state, &p)?;
        state = next;
        tracker.record(&diagnostics(&sp, &state, &p, scheme)?, &info);
    }
    Ok((tracker.max_overshoot, tracker.relative_mass_drift()))
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut levels: Vec<usize> = std::env::args().skip(1).map(|s| s.parse()).collect::<Result<_, _>>()?;
    if levels.is_empty() {
        levels = vec![64, 128];
    }
    let coarse_eps = 2.0 / levels[0] as f64;
    let horizon = 64.0 * coarse_eps.powi(4);

    println!("{:>6} {:>10} {:>14} {:>14} {:>14}", "N", "eps", "mch os/eps", "nmn os/eps", "nmn mass drift");
    let (mut eps, mut mch, mut nmn) = (Vec::new(), Vec::new(), Vec::new());
    for &n in &levels {
        let e = 2.0 / n as f64;
        let (om, _) = max_overshoot(n, ChScheme::MchSav1, horizon)?;
        let (on, drift) = max_overshoot(n, ChScheme::NmnSav1, horizon)?;
        println!("{n:>6} {e:>10.4e} {:>14.4} {:>14.4} {drift:>14.3e}", om / e, on / e);
        eps.push(e);
        mch.push(om);
        nmn.push(on);
    }
    if let (Some(a), Some(b)) = (log_log_slope(&eps, &mch), log_log_slope(&eps, &nmn)) {
        println!("overshoot ~ eps^p: mch p = {a:.2}, nmn p = {b:.2}");
    }
    Ok(())
}
