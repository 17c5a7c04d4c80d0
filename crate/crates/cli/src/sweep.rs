//! Parameter sweeps and the controller comparison.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use neurocart::control::ControllerConfig;
use neurocart::metrics::{
    core_utilization, experimental_chip_area, theoretical_chip_area, HardwareConstants,
};
use neurocart::nef::{InterceptSpec, RateRange};
use rayon::prelude::*;

use crate::config::{ControllerKind, EnsembleConfig, ExperimentConfig};
use crate::io::{num, write_atomic};
use crate::run::{seed_dir, simulate, write_report, MetricsReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Neurons,
    Intercepts,
    MaxRates,
    Ki,
}

impl FromStr for Axis {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "neurons" => Axis::Neurons,
            "intercepts" => Axis::Intercepts,
            "max_rates" => Axis::MaxRates,
            "ki" => Axis::Ki,
            _ => bail!("unknown axis {s:?}; expected neurons, intercepts, max_rates or ki"),
        })
    }
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Neurons => "neurons",
            Axis::Intercepts => "intercepts",
            Axis::MaxRates => "max_rates",
            Axis::Ki => "ki",
        }
    }

    /// Errors unless the controller kind has the parameter this axis varies.
    pub fn check(self, kind: ControllerKind) -> Result<()> {
        let ok = match self {
            Axis::Ki => kind.uses_pid(),
            _ => kind.uses_ensemble(),
        };
        if !ok {
            bail!(
                "--axis {}: not a parameter of controller kind \"{}\"",
                self.name(),
                kind.name()
            );
        }
        Ok(())
    }

    /// Parses a comma-separated value list. Max-rate values are `lo:hi` in Hz.
    pub fn parse_values(self, text: &str) -> Result<Vec<AxisValue>> {
        let values = text
            .split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| {
                let real = || {
                    v.parse::<f64>().with_context(|| {
                        format!("--values: bad number {v:?} for axis {}", self.name())
                    })
                };
                Ok(match self {
                    Axis::Neurons => AxisValue::Neurons(
                        v.parse()
                            .with_context(|| format!("--values: bad neuron count {v:?}"))?,
                    ),
                    Axis::Intercepts => AxisValue::Intercepts(real()?),
                    Axis::Ki => AxisValue::Ki(real()?),
                    Axis::MaxRates => {
                        let (lo, hi) = v.split_once(':').ok_or_else(|| {
                            anyhow!("--values: max rates are lo:hi pairs, got {v:?}")
                        })?;
                        AxisValue::MaxRates(lo.trim().parse()?, hi.trim().parse()?)
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if values.is_empty() {
            bail!("--values: no values given");
        }
        Ok(values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisValue {
    Neurons(usize),
    /// Half-width of a linspace or uniform range, or the normal sigma.
    Intercepts(f64),
    MaxRates(f64, f64),
    Ki(f64),
}

impl AxisValue {
    pub fn axis(&self) -> Axis {
        match self {
            AxisValue::Neurons(_) => Axis::Neurons,
            AxisValue::Intercepts(_) => Axis::Intercepts,
            AxisValue::MaxRates(..) => Axis::MaxRates,
            AxisValue::Ki(_) => Axis::Ki,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            AxisValue::Neurons(n) => n.to_string(),
            AxisValue::Intercepts(v) | AxisValue::Ki(v) => v.to_string(),
            AxisValue::MaxRates(lo, hi) => format!("{lo}:{hi}"),
        }
    }

    /// The config with this value substituted.
    pub fn apply(&self, base: &ExperimentConfig) -> Result<ExperimentConfig> {
        let mut cfg = base.clone();
        let kind = cfg.controller.kind;
        let ensemble = |cfg: &mut ExperimentConfig| -> Result<()> {
            if !kind.uses_ensemble() {
                bail!(
                    "axis needs an ensemble controller, kind is \"{}\"",
                    kind.name()
                );
            }
            cfg.controller
                .ensemble
                .get_or_insert_with(EnsembleConfig::default);
            Ok(())
        };
        match *self {
            AxisValue::Neurons(n) => {
                ensemble(&mut cfg)?;
                cfg.controller
                    .ensemble
                    .as_mut()
                    .expect("set above")
                    .n_neurons = n;
            }
            AxisValue::Intercepts(w) => {
                ensemble(&mut cfg)?;
                let e = cfg.controller.ensemble.as_mut().expect("set above");
                e.intercepts = match e.intercepts {
                    InterceptSpec::Linspace { .. } => InterceptSpec::symmetric_linspace(w),
                    InterceptSpec::Uniform { .. } => InterceptSpec::Uniform { lo: -w, hi: w },
                    InterceptSpec::Normal { clip, .. } => InterceptSpec::Normal { sigma: w, clip },
                };
            }
            AxisValue::MaxRates(lo, hi) => {
                ensemble(&mut cfg)?;
                cfg.controller
                    .ensemble
                    .as_mut()
                    .expect("set above")
                    .max_rates = RateRange { lo, hi };
            }
            AxisValue::Ki(ki) => match cfg.controller.pid.as_mut() {
                Some(pid) => pid.ki = ki,
                None => bail!(
                    "axis ki needs a PID controller, kind is \"{}\"",
                    kind.name()
                ),
            },
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Columns aggregated over seeds, taken from the first link angle except
/// for the ripple and the neuromorphic counts.
pub const METRICS: [&str; 10] = [
    "peak_overshoot",
    "rise_time",
    "settling_time",
    "steady_state_error",
    "iae",
    "itae",
    "isc",
    "control_ripple",
    "spikes_per_neuron",
    "energy_loihi",
];

fn metric(r: &MetricsReport, key: &str) -> Option<f64> {
    let a = &r.angles[0];
    match key {
        "peak_overshoot" => a.peak_overshoot,
        "rise_time" => a.rise_time,
        "settling_time" => a.settling_time,
        "steady_state_error" => Some(a.steady_state_error),
        "iae" => Some(a.iae),
        "itae" => Some(a.itae),
        "isc" => Some(a.isc),
        "control_ripple" => Some(r.control_ripple),
        "spikes_per_neuron" => Some(r.neuromorphic.spikes_per_neuron),
        "energy_loihi" => Some(r.neuromorphic.energy_loihi),
        _ => None,
    }
}

/// Mean and sample standard deviation over the seeds where a metric is defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len();
        if n == 0 {
            return Stat {
                mean: f64::NAN,
                std: f64::NAN,
                count: 0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Stat {
            mean,
            std,
            count: n,
        }
    }

    /// Standard error of the mean.
    pub fn sem(&self) -> f64 {
        self.std / (self.count as f64).sqrt()
    }
}

/// One table row: a sweep value or a compared controller.
#[derive(Debug, Clone)]
pub struct Row {
    pub label: String,
    pub n_neurons: usize,
    pub seeds: usize,
    /// Seeds whose plant fell; excluded from the means.
    pub failures: usize,
    pub errors: Vec<String>,
    pub reports: Vec<MetricsReport>,
}

impl Row {
    fn new(label: String, n_neurons: usize, seeds: usize) -> Row {
        Row {
            label,
            n_neurons,
            seeds,
            failures: 0,
            errors: Vec::new(),
            reports: Vec::new(),
        }
    }

    pub fn stat(&self, key: &str) -> Stat {
        let values: Vec<f64> = self
            .reports
            .iter()
            .filter(|r| !r.failed())
            .filter_map(|r| metric(r, key))
            .collect();
        Stat::of(&values)
    }

    pub fn status(&self) -> String {
        if let Some(e) = self.errors.first() {
            format!("error: {}", e.replace([',', '\n'], ";"))
        } else if self.failures > 0 {
            format!("pole-fell {}/{}", self.failures, self.seeds)
        } else {
            "ok".into()
        }
    }
}

pub fn table_csv(first: &str, rows: &[Row], hw: &HardwareConstants) -> String {
    let mut out = format!("{first},n_neurons,seeds,failures,status");
    for m in METRICS {
        let _ = write!(out, ",{m}_mean,{m}_std,{m}_n");
    }
    out.push_str(",core_utilization,n_cores,area_experimental,area_theoretical\n");
    for row in rows {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            row.label,
            row.n_neurons,
            row.seeds,
            row.failures,
            row.status()
        );
        for m in METRICS {
            let s = row.stat(m);
            let _ = write!(out, ",{},{},{}", num(s.mean), num(s.std), s.count);
        }
        let (util, cores) = if row.n_neurons == 0 {
            (0.0, 0)
        } else {
            core_utilization(row.n_neurons, hw)
        };
        let _ = writeln!(
            out,
            ",{},{},{},{}",
            num(util),
            cores,
            num(experimental_chip_area(util, cores, hw)),
            num(theoretical_chip_area(row.n_neurons, hw))
        );
    }
    out
}

/// Short human-readable table for the terminal.
pub fn table_text(first: &str, rows: &[Row]) -> String {
    let mut out = format!(
        "{first:>14} {:>9} {:>9} {:>9} {:>10} {:>10} {:>10}  status\n",
        "PO %", "Tr s", "Ts s", "SSE rad", "IAE", "ISC"
    );
    for r in rows {
        let m = |k| r.stat(k).mean;
        let _ = writeln!(
            out,
            "{:>14} {:>9.3} {:>9.3} {:>9.3} {:>10.3e} {:>10.3e} {:>10.3e}  {}",
            r.label,
            m("peak_overshoot"),
            m("rise_time"),
            m("settling_time"),
            m("steady_state_error"),
            m("iae"),
            m("isc"),
            r.status()
        );
    }
    out
}

struct Cell {
    row: usize,
    name: String,
    controller: ControllerConfig,
    cfg: ExperimentConfig,
    seed: u64,
    dir: Option<std::path::PathBuf>,
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            bail!("--workers: must be >= 1");
        }
        b = b.num_threads(w);
    }
    Ok(b.build()?)
}

/// Runs cells concurrently and merges them into `rows` in cell order.
fn execute(cells: Vec<Cell>, rows: &mut [Row], workers: Option<usize>) -> Result<()> {
    let results: Vec<(usize, Result<MetricsReport>)> = pool(workers)?.install(|| {
        cells
            .par_iter()
            .map(|c| {
                let r = simulate(&c.cfg, &c.name, &c.controller, c.seed).and_then(|run| {
                    if let Some(d) = &c.dir {
                        write_report(&seed_dir(d, c.seed), &run)?;
                    }
                    Ok(run.report)
                });
                (c.row, r)
            })
            .collect()
    });
    for (row, r) in results {
        let row = &mut rows[row];
        match r {
            Ok(rep) => {
                row.failures += rep.failed() as usize;
                row.reports.push(rep);
            }
            Err(e) => row.errors.push(format!("{e:#}")),
        }
    }
    Ok(())
}

/// Runs every value across the config's seeds. Cells whose config is
/// invalid or whose run errors are reported in their row; the sweep
/// continues. With `dir`, each cell's metrics land in
/// `<dir>/<label>/seed_<s>/`.
pub fn sweep(
    base: &ExperimentConfig,
    axis: Axis,
    values: &[AxisValue],
    workers: Option<usize>,
    dir: Option<&Path>,
) -> Result<Vec<Row>> {
    axis.check(base.controller.kind)?;
    if let Some(v) = values.iter().find(|v| v.axis() != axis) {
        bail!(
            "value {} does not belong to axis {}",
            v.label(),
            axis.name()
        );
    }
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for (i, v) in values.iter().enumerate() {
        let cfg = v.apply(base);
        let n_neurons = match &cfg {
            Ok(c) => c.controller.ensemble.as_ref().map_or(0, |e| e.n_neurons),
            Err(_) => 0,
        };
        let mut row = Row::new(v.label(), n_neurons, base.seeds.len());
        match cfg.and_then(|c| Ok((c.controller()?, c))) {
            Ok((controller, cfg)) => {
                if controller.is_spiking()
                    && !matches!(
                        controller,
                        ControllerConfig::SpikingLqrEnsemble { .. }
                            | ControllerConfig::SpikingPid { .. }
                    )
                {
                    row.n_neurons = 2;
                }
                for &seed in &cfg.seeds {
                    cells.push(Cell {
                        row: i,
                        name: cfg.controller.kind.name().to_string(),
                        controller: controller.clone(),
                        cfg: cfg.clone(),
                        seed,
                        dir: dir.map(|d| d.join(v.label().replace(':', "-"))),
                    });
                }
            }
            Err(e) => row.errors.push(format!("{e:#}")),
        }
        rows.push(row);
    }
    execute(cells, &mut rows, workers)?;
    Ok(rows)
}

/// Controllers of the comparison table: non-spiking LQR, PID and SMC, and
/// the spiking LQR and PID ensembles.
pub fn comparison_controllers(
    cfg: &ExperimentConfig,
) -> Result<Vec<(&'static str, ControllerConfig)>> {
    let gain = cfg.gain()?;
    let ensemble = cfg.controller.ensemble.clone().unwrap_or_default().spec();
    let radius = cfg.controller.radius.unwrap_or_default();
    Ok(vec![
        ("lqr", ControllerConfig::Lqr { gain: gain.clone() }),
        (
            "pid",
            ControllerConfig::Pid {
                pid: cfg.compare.pid,
            },
        ),
        (
            "smc",
            ControllerConfig::Smc {
                smc: cfg.compare.smc,
            },
        ),
        (
            "spiking-lqr",
            ControllerConfig::SpikingLqrEnsemble {
                gain,
                ensemble: ensemble.clone(),
                radius,
            },
        ),
        (
            "spiking-pid",
            ControllerConfig::SpikingPid {
                pid: cfg.compare.pid,
                ensemble,
                radius,
            },
        ),
    ])
}

pub fn compare(
    cfg: &ExperimentConfig,
    workers: Option<usize>,
    dir: Option<&Path>,
) -> Result<Vec<Row>> {
    let controllers = comparison_controllers(cfg)?;
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for (i, (name, controller)) in controllers.into_iter().enumerate() {
        let n = match &controller {
            ControllerConfig::SpikingLqrEnsemble { ensemble, .. }
            | ControllerConfig::SpikingPid { ensemble, .. } => ensemble.n_neurons,
            _ => 0,
        };
        rows.push(Row::new(name.to_string(), n, cfg.seeds.len()));
        for &seed in &cfg.seeds {
            cells.push(Cell {
                row: i,
                name: name.to_string(),
                controller: controller.clone(),
                cfg: cfg.clone(),
                seed,
                dir: dir.map(|d| d.join(name)),
            });
        }
    }
    execute(cells, &mut rows, workers)?;
    Ok(rows)
}

/// Writes a table and the resolved config under `dir`.
pub fn write_table(
    dir: &Path,
    file: &str,
    first: &str,
    rows: &[Row],
    cfg: &ExperimentConfig,
) -> Result<()> {
    write_atomic(&dir.join("config.resolved.toml"), cfg.to_toml()?.as_bytes())?;
    write_atomic(
        &dir.join(file),
        table_csv(first, rows, &cfg.hardware).as_bytes(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values_parse() {
        assert_eq!(
            Axis::Neurons.parse_values("2, 4").unwrap(),
            vec![AxisValue::Neurons(2), AxisValue::Neurons(4)]
        );
        assert_eq!(
            Axis::MaxRates.parse_values("200:400").unwrap(),
            vec![AxisValue::MaxRates(200.0, 400.0)]
        );
        assert!(Axis::MaxRates.parse_values("200").is_err());
        assert!(Axis::Neurons.parse_values("2.5").is_err());
        assert!("speed".parse::<Axis>().is_err());
        assert_eq!(AxisValue::Intercepts(0.25).label(), "0.25");
    }

    #[test]
    fn stats() {
        let s = Stat::of(&[1.0, 2.0, 3.0]);
        assert_eq!((s.mean, s.std, s.count), (2.0, 1.0, 3));
        assert_eq!(Stat::of(&[4.0]).std, 0.0);
        assert!(Stat::of(&[]).mean.is_nan());
    }
}
