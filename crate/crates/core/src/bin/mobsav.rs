use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use mobsav::io::{compare, exit_code, load_config, presets, print_summary, run};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

#[derive(Parser)]
#[command(version, about = "Mobility-relaxed SAV schemes for Cahn-Hilliard flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// Join the diagnostics of two runs by step and print the deltas as CSV.
    Compare { dir_a: PathBuf, dir_b: PathBuf },
    /// List the experiment presets with their filled-in defaults.
    Presets,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => load_config(&config).and_then(|cfg| {
            let summary = run(&cfg)?;
            print_summary(&summary, std::io::stdout().lock())
        }),
        Command::Compare { dir_a, dir_b } => {
            compare(&dir_a, &dir_b).and_then(|c| c.write_csv(std::io::stdout().lock()))
        }
        Command::Presets => presets().map(|list| {
            for cfg in list {
                println!("{}: {}", cfg.experiment, cfg.experiment.description());
                println!("{}\n", cfg.to_json());
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
