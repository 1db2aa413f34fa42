//! Runs the perturbed-tube preset under the N M N model until the tube
//! breaks into droplets, writing the usual run directory.
//!
//! Usage: `dewetting_tube [output_dir] [snapshot_every]`, defaulting to
//! `runs/nmn3d-tube 0`.

use std::path::PathBuf;

use mobsav::io::{print_summary, run, Experiment, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut config = RunConfig::preset(Experiment::Nmn3dTube)?;
    if let Some(dir) = args.first() {
        config.output_dir = Some(PathBuf::from(dir));
    }
    if let Some(every) = args.get(1) {
        config.snapshot_every = Some(every.parse()?);
    }
    let summary = run(&config)?;
    print_summary(&summary, std::io::stdout().lock())?;
    Ok(())
}
