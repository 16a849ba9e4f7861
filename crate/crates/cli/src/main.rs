//! `dirac-edge` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime (numerical / I/O)
//! error. `DIRAC_EDGE_THREADS` limits the rayon worker pool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dirac_edge::config::Config;
use dirac_edge::experiments::{resolve, run, Experiment, RunError};

#[derive(Parser)]
#[command(
    name = "dirac-edge",
    about = "Wavepackets guided along magnetic Dirac interfaces: asymptotic \
             assembly and split-step evolution, cross-validated"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        /// Path to the configuration file.
        config: PathBuf,
        /// Output directory (default: the config's `output.dir`, or
        /// `out/<experiment>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the time step.
        #[arg(long)]
        dt: Option<f64>,
        /// Override the grid to N x N cells.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// List the available experiments.
    ListExperiments,
    /// Parse a config file and print the resolved scenario without running.
    Validate {
        /// Path to the configuration file.
        config: PathBuf,
    },
}

fn load_config(path: &PathBuf) -> Result<Config, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    Config::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn init_threads() {
    if let Ok(v) = std::env::var("DIRAC_EDGE_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    log::warn!("could not set thread pool size: {e}");
                }
            }
            _ => log::warn!("ignoring invalid DIRAC_EDGE_THREADS = {v:?}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    init_threads();
    let cli = Cli::parse();
    match cli.command {
        Command::ListExperiments => {
            for e in Experiment::ALL {
                println!("{:<22} {}", e.name(), e.description());
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load_config(&config) {
            Ok(cfg) => match resolve(&cfg) {
                Ok(plan) => {
                    println!("experiment: {}", plan.experiment.name());
                    println!("  {}", plan.experiment.description());
                    println!("epsilon:    {}", plan.spec.epsilon);
                    println!(
                        "grid:       {} x {} on [{}, {}] x [{}, {}]",
                        plan.grid.nx,
                        plan.grid.ny,
                        plan.grid.x0,
                        plan.grid.x1,
                        plan.grid.y0,
                        plan.grid.y1
                    );
                    println!("t_end:      {}", plan.t_end);
                    println!("gauge_q:    {}", plan.gauge_q);
                    println!("sha256:     {}", cfg.sha256());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            },
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Run {
            config,
            out,
            dt,
            grid,
        } => {
            let mut cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Some(dt) = dt {
                cfg.dt = Some(dt);
            }
            if let Some(n) = grid {
                cfg.grid.nx = Some(n);
                cfg.grid.ny = Some(n);
            }
            let out_dir = out
                .or_else(|| cfg.output.dir.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(&cfg.experiment));
            match run(&cfg, &out_dir) {
                Ok(summary) => {
                    for (k, v) in &summary {
                        println!("{k} = {v}");
                    }
                    println!("artifacts written to {}", out_dir.display());
                    ExitCode::SUCCESS
                }
                Err(RunError::Config(e)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(3)
                }
            }
        }
    }
}
