use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use neurocart::control::SimOutcome;
use neurocart_cli::config::{parse_seeds, ExperimentConfig};
use neurocart_cli::io::num;
use neurocart_cli::sweep::{self, Axis};
use neurocart_cli::{plot, run, EXIT_POLE_FELL, OUT_ENV};

#[derive(Parser)]
#[command(
    name = "neurocart",
    version,
    about = "Spiking and classical control of pendula on a cart"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Seeds, e.g. `0,1,2` or `0-4`; overrides the config.
    #[arg(long)]
    seeds: Option<String>,
    /// Output root; artifacts go under `<DIR>/<name>`.
    #[arg(long, value_name = "DIR", env = OUT_ENV)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the LQR gain for the config's plant and weights.
    Gains {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
    },
    /// Run the config once per seed and write traces, rasters and metrics.
    Run(Common),
    /// Vary one parameter and tabulate seed-mean metrics.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// neurons, intercepts, max_rates or ki; defaults to the config's sweep.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated values; max rates as `lo:hi`.
        #[arg(long)]
        values: Option<String>,
        /// Worker threads; defaults to the number of CPUs
        #[arg(long, value_name = "N")]
        workers: Option<usize>,
    },
    /// Compare LQR, PID and SMC with spiking LQR and spiking PID.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Worker threads; defaults to the number of CPUs
        #[arg(long, value_name = "N")]
        workers: Option<usize>,
    },
    /// Render SVG figures from run or sweep artifacts.
    Plot {
        /// Seed or run directory, or a table CSV.
        path: PathBuf,
        /// Directory for the figures; defaults next to the artifacts.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(s) = &common.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    Ok(cfg)
}

fn gains(config: &Path) -> Result<()> {
    let cfg = ExperimentConfig::load(config)?;
    let k = cfg.gain()?;
    let n = cfg.plant.n_links;
    let mut names = vec!["x".to_string()];
    names.extend((1..=n).map(|i| format!("theta_{i}")));
    names.push("xdot".into());
    names.extend((1..=n).map(|i| format!("thetadot_{i}")));
    println!("# u = -K x");
    for (name, v) in names.iter().zip(k.as_slice()) {
        println!("{name},{}", num(*v));
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gains { config } => gains(&config)?,
        Command::Run(common) => {
            let cfg = load(&common)?;
            let dir = cfg.output_dir(common.out.as_deref());
            let summary = run::run(&cfg, &dir)?;
            for r in &summary.reports {
                let a = &r.angles[0];
                let ts = r
                    .settling_time()
                    .map_or("unsettled".into(), |t| format!("{t:.3} s"));
                let outcome = match r.outcome {
                    SimOutcome::Completed => "completed".to_string(),
                    SimOutcome::PoleFell { time, link } => {
                        format!("POLE FELL (link {} at {time:.3} s)", link + 1)
                    }
                };
                println!(
                    "seed {}: {outcome}  Ts {ts}  PO {:.3} %  SSE {:.3e} rad  ISC {:.4e}",
                    r.seed,
                    a.peak_overshoot.unwrap_or(f64::NAN),
                    a.steady_state_error,
                    a.isc
                );
            }
            println!("artifacts in {}", summary.dir.display());
            if !summary.failures.is_empty() {
                for f in &summary.failures {
                    eprintln!("seed {}: {}", f.seed, f.message);
                }
                return Ok(ExitCode::from(EXIT_POLE_FELL as u8));
            }
        }
        Command::Sweep {
            common,
            axis,
            values,
            workers,
        } => {
            let cfg = load(&common)?;
            let shipped = cfg.sweep.clone();
            let axis: Axis = axis
                .or_else(|| shipped.as_ref().map(|s| s.axis.clone()))
                .context("--axis is required when the config has no [sweep] section")?
                .parse()?;
            let values = values
                .or_else(|| {
                    shipped
                        .as_ref()
                        .filter(|s| s.axis == axis.name())
                        .map(|s| s.values.clone())
                })
                .context("--values is required unless the config's [sweep] uses this axis")?;
            let values = axis.parse_values(&values)?;
            let dir = cfg.output_dir(common.out.as_deref());
            let cells = dir.join(format!("sweep_{}", axis.name()));
            let rows = sweep::sweep(&cfg, axis, &values, workers, Some(&cells))?;
            let file = format!("sweep_{}.csv", axis.name());
            sweep::write_table(&dir, &file, axis.name(), &rows, &cfg)?;
            print!("{}", sweep::table_text(axis.name(), &rows));
            println!("table in {}", dir.join(file).display());
        }
        Command::Compare { common, workers } => {
            let cfg = load(&common)?;
            let dir = cfg.output_dir(common.out.as_deref());
            let rows = sweep::compare(&cfg, workers, Some(&dir.join("compare")))?;
            sweep::write_table(&dir, "compare.csv", "controller", &rows, &cfg)?;
            print!("{}", sweep::table_text("controller", &rows));
            println!("table in {}", dir.join("compare.csv").display());
        }
        Command::Plot { path, out } => {
            for p in plot::render(&path, out.as_deref())? {
                println!("{}", p.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
