//! Single runs: one closed loop per seed and its artifacts.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Result;
use neurocart::control::{closed_loop_sim, ControllerConfig, SimOutcome, SimTrace};
use neurocart::metrics::{
    control_metrics, control_ripple, neuromorphic_metrics, ControlMetrics, NeuromorphicMetrics,
    DEFAULT_BAND, RIPPLE_TAU,
};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::io::{raster_csv, to_json, trace_csv, write_atomic};

/// Deterministic per-seed report written as `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub controller: String,
    pub seed: u64,
    pub outcome: SimOutcome,
    /// One entry per link angle.
    pub angles: Vec<ControlMetrics>,
    pub cart: ControlMetrics,
    /// Standard deviation of the force about its lowpassed value, N.
    pub control_ripple: f64,
    pub radius: Option<f64>,
    pub n_neurons: usize,
    pub inferences: u64,
    pub synops: u64,
    pub neuron_updates: u64,
    pub neuromorphic: NeuromorphicMetrics,
}

impl MetricsReport {
    pub fn from_trace(name: &str, trace: &SimTrace, cfg: &ExperimentConfig) -> Result<Self> {
        let n = cfg.plant.n_links;
        let angles = (1..=n)
            .map(|i| control_metrics(trace, i, DEFAULT_BAND))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MetricsReport {
            controller: name.to_string(),
            seed: trace.seed,
            outcome: trace.outcome,
            angles,
            cart: control_metrics(trace, 0, DEFAULT_BAND)?,
            control_ripple: control_ripple(trace, RIPPLE_TAU),
            radius: trace.radius,
            n_neurons: trace.n_neurons,
            inferences: trace.inferences,
            synops: trace.synops,
            neuron_updates: trace.neuron_updates,
            neuromorphic: neuromorphic_metrics(trace, &cfg.hardware, None),
        })
    }

    pub fn failed(&self) -> bool {
        !matches!(self.outcome, SimOutcome::Completed)
    }

    /// Latest settling time over all links, `None` if any link is unsettled.
    pub fn settling_time(&self) -> Option<f64> {
        self.angles
            .iter()
            .try_fold(0.0f64, |m, a| a.settling_time.map(|t| m.max(t)))
    }
}

/// Wall-clock instrumentation, informational only.
#[derive(Debug, Clone, Serialize)]
pub struct RuntimeReport {
    pub wall_time: f64,
    pub simulated_time: f64,
    pub real_time_factor: f64,
    pub cpu_time: f64,
    pub cpu_utilization: f64,
    /// J.
    pub energy_cpu_estimate: f64,
    /// KiB.
    pub peak_rss: i64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub controller: String,
    pub seed: u64,
    pub status: &'static str,
    pub time: f64,
    /// 1-based link index.
    pub link: usize,
    pub message: String,
}

pub struct SeedRun {
    pub trace: SimTrace,
    pub report: MetricsReport,
    pub runtime: RuntimeReport,
}

impl SeedRun {
    pub fn failure(&self) -> Option<FailureRecord> {
        match self.trace.outcome {
            SimOutcome::Completed => None,
            SimOutcome::PoleFell { time, link } => Some(FailureRecord {
                controller: self.report.controller.clone(),
                seed: self.report.seed,
                status: "pole-fell",
                time,
                link: link + 1,
                message: format!("link {} passed horizontal at t = {time:.3} s; the controller failed to balance the plant", link + 1),
            }),
        }
    }
}

struct Usage {
    cpu: f64,
    max_rss: i64,
}

fn usage() -> Usage {
    #[cfg(target_os = "linux")]
    let who = libc::RUSAGE_THREAD;
    #[cfg(not(target_os = "linux"))]
    let who = libc::RUSAGE_SELF;
    // SAFETY: getrusage only writes into the zeroed struct we own.
    let ru = unsafe {
        let mut ru: libc::rusage = std::mem::zeroed();
        libc::getrusage(who, &mut ru);
        ru
    };
    let secs = |t: libc::timeval| t.tv_sec as f64 + t.tv_usec as f64 * 1e-6;
    Usage {
        cpu: secs(ru.ru_utime) + secs(ru.ru_stime),
        max_rss: ru.ru_maxrss as i64,
    }
}

/// Runs one seed of `controller` on the config's plant.
pub fn simulate(
    cfg: &ExperimentConfig,
    name: &str,
    controller: &ControllerConfig,
    seed: u64,
) -> Result<SeedRun> {
    let before = usage();
    let start = Instant::now();
    let trace = closed_loop_sim(
        &cfg.system_params(),
        controller,
        &cfg.x0(),
        &cfg.settings(),
        seed,
    )?;
    let wall = start.elapsed().as_secs_f64().max(1e-9);
    let after = usage();
    let report = MetricsReport::from_trace(name, &trace, cfg)?;
    let cpu = (after.cpu - before.cpu).max(0.0);
    let util = (cpu / wall).min(1.0);
    let simulated = trace.times.last().copied().unwrap_or(0.0);
    let runtime = RuntimeReport {
        wall_time: wall,
        simulated_time: simulated,
        real_time_factor: simulated / wall,
        cpu_time: cpu,
        cpu_utilization: util,
        energy_cpu_estimate: neurocart::metrics::estimated_cpu_energy(wall, util, &cfg.hardware),
        peak_rss: after.max_rss,
    };
    Ok(SeedRun {
        trace,
        report,
        runtime,
    })
}

/// Writes `metrics.json` and, for a fallen run, `failure.json`.
pub fn write_report(dir: &Path, run: &SeedRun) -> Result<()> {
    write_atomic(&dir.join("metrics.json"), to_json(&run.report)?.as_bytes())?;
    if let Some(f) = run.failure() {
        write_atomic(&dir.join("failure.json"), to_json(&f)?.as_bytes())?;
    }
    Ok(())
}

/// Writes the full artifact set of one seed.
pub fn write_seed(dir: &Path, run: &SeedRun) -> Result<()> {
    write_atomic(&dir.join("trace.csv"), trace_csv(&run.trace).as_bytes())?;
    write_atomic(&dir.join("raster.csv"), raster_csv(&run.trace).as_bytes())?;
    write_atomic(&dir.join("runtime.json"), to_json(&run.runtime)?.as_bytes())?;
    let stale = dir.join("failure.json");
    if stale.exists() {
        std::fs::remove_file(stale)?;
    }
    write_report(dir, run)
}

pub fn seed_dir(root: &Path, seed: u64) -> PathBuf {
    root.join(format!("seed_{seed}"))
}

pub struct RunSummary {
    pub dir: PathBuf,
    pub reports: Vec<MetricsReport>,
    pub failures: Vec<FailureRecord>,
}

/// Runs every seed of the config and writes artifacts under `dir`.
pub fn run(cfg: &ExperimentConfig, dir: &Path) -> Result<RunSummary> {
    let controller = cfg.controller()?;
    write_atomic(&dir.join("config.resolved.toml"), cfg.to_toml()?.as_bytes())?;
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for &seed in &cfg.seeds {
        let r = simulate(cfg, cfg.controller.kind.name(), &controller, seed)?;
        write_seed(&seed_dir(dir, seed), &r)?;
        failures.extend(r.failure());
        reports.push(r.report);
    }
    Ok(RunSummary {
        dir: dir.to_path_buf(),
        reports,
        failures,
    })
}
