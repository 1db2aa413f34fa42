//! Runs the paired disk presets for a few hundred steps and prints how far
//! the two models drift apart in each diagnostic.
//!
//! Usage: `compare_runs [steps] [root]`, defaulting to `256 runs/compare`.

use std::path::PathBuf;

use mobsav::io::{compare, run, Experiment, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let steps: usize = args.first().map(|s| s.parse()).transpose()?.unwrap_or(256);
    let root = PathBuf::from(args.get(1).map(String::as_str).unwrap_or("runs/compare"));

    let mut dirs = Vec::new();
    for experiment in [Experiment::Mch2d, Experiment::Nmn2d] {
        let mut config = RunConfig::preset(experiment)?;
        config.n_steps = Some(steps);
        let dir = root.join(experiment.name());
        config.output_dir = Some(dir.clone());
        run(&config)?;
        dirs.push(dir);
    }
    let c = compare(&dirs[0], &dirs[1])?;
    println!("{:<16} {:>14} {:>14}", "column", "max |b - a|", "final b - a");
    for (column, max) in c.max_abs_deltas() {
        let last = c.final_delta(&column).unwrap_or(f64::NAN);
        println!("{column:<16} {max:>14.4e} {last:>14.4e}");
    }
    Ok(())
}
