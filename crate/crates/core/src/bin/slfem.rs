use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use slfem::app::{all_converged, list_scenarios, parse_config, run};

#[derive(Parser)]
#[command(
    name = "slfem",
    version,
    about = "Crack-tip fields in strain-limiting transversely isotropic solids"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every sweep point of a configuration file.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Number of sweep points solved in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Accepted for interface stability; the solver is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List scenario presets.
    Scenarios,
    /// Print the version.
    Version,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            output_dir,
            jobs,
            seed: _,
        } => {
            let mut cfg = match parse_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            match run(&cfg, jobs) {
                Ok(manifests) => {
                    for m in &manifests {
                        let detail = match (&m.error, &m.report) {
                            (Some(e), _) => e.clone(),
                            (None, Some(r)) => format!(
                                "{} iterations, residual {:.3e}",
                                r.iterations_used,
                                r.final_residual().unwrap_or(f64::NAN)
                            ),
                            (None, None) => String::new(),
                        };
                        println!("{} {} {} {}", m.scenario, m.point.tag(), m.status.name(), detail);
                    }
                    if all_converged(&manifests) {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Scenarios => {
            print!("{}", list_scenarios());
            ExitCode::SUCCESS
        }
        Command::Version => {
            println!("slfem {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
    }
}
