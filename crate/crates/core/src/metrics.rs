//! Control KPIs from traces and analytic neuromorphic resource estimates.

use serde::{Deserialize, Serialize};

use crate::control::{SimOutcome, SimTrace};
use crate::error::{invalid, Error, Result};
use crate::nef::lowpass_filter;

pub const DEFAULT_BAND: f64 = 0.05;
/// Fraction of the trace, taken from its end, averaged for the final value.
pub const FINAL_FRACTION: f64 = 0.1;
/// Lowpass time constant separating control ripple from the command.
pub const RIPPLE_TAU: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlMetrics {
    /// 10 to 90 % of the normalized recovery, s.
    pub rise_time: Option<f64>,
    /// Overshoot past the final value relative to the initial deviation, %.
    pub peak_overshoot: Option<f64>,
    /// Last exit from the settling band, s.
    pub settling_time: Option<f64>,
    pub steady_state_error: f64,
    pub iae: f64,
    pub itae: f64,
    /// ∫u² dt, N²·s.
    pub isc: f64,
    pub final_value: f64,
    /// Initial value equals the final value; time metrics are undefined.
    pub degenerate: bool,
    /// The run ended early because a link fell.
    pub pole_fell: bool,
}

fn trapezoid(times: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    (1..times.len())
        .map(|k| 0.5 * (times[k] - times[k - 1]) * (f(k) + f(k - 1)))
        .sum()
}

/// Time at which the segment from `(t0, a)` to `(t1, b)` crosses `level`.
fn crossing(t0: f64, t1: f64, a: f64, b: f64, level: f64) -> f64 {
    if b == a {
        t1
    } else {
        t0 + (t1 - t0) * ((level - a) / (b - a)).clamp(0.0, 1.0)
    }
}

fn first_reach(times: &[f64], r: &[f64], level: f64) -> Option<f64> {
    if r[0] >= level {
        return Some(times[0]);
    }
    (1..r.len())
        .find(|&k| r[k] >= level)
        .map(|k| crossing(times[k - 1], times[k], r[k - 1], r[k], level))
}

/// Metrics of one state channel regulated to zero. Time metrics use the
/// normalized recovery `1 − (y − y∞)/(y(0) − y∞)` with `y∞` the mean of the
/// final tenth of the trace.
pub fn control_metrics(trace: &SimTrace, channel: usize, band: f64) -> Result<ControlMetrics> {
    if trace.is_empty() {
        return Err(invalid("trace", "must be nonempty"));
    }
    let dim = trace.states[0].len();
    if channel >= dim {
        return Err(Error::Dimension {
            expected: dim,
            got: channel,
        });
    }
    if !(band > 0.0 && band < 1.0) {
        return Err(invalid("band", "must lie in (0, 1)"));
    }
    let y = trace.channel(channel);
    metrics_from_signal(
        &trace.times,
        &y,
        &trace.controls,
        band,
        !matches!(trace.outcome, SimOutcome::Completed),
    )
}

/// Same as [`control_metrics`] on raw samples with reference zero.
pub fn metrics_from_signal(
    times: &[f64],
    y: &[f64],
    u: &[f64],
    band: f64,
    pole_fell: bool,
) -> Result<ControlMetrics> {
    let n = times.len();
    if n == 0 || y.len() != n || u.len() != n {
        return Err(invalid(
            "trace",
            "times, signal and controls must be nonempty and equal length",
        ));
    }
    let tail = ((n as f64 * FINAL_FRACTION).ceil() as usize).clamp(1, n);
    let y_inf = y[n - tail..].iter().sum::<f64>() / tail as f64;
    let iae = trapezoid(times, |k| y[k].abs());
    let itae = trapezoid(times, |k| times[k] * y[k].abs());
    let isc = trapezoid(times, |k| u[k] * u[k]);
    let span = y[0] - y_inf;
    let mut m = ControlMetrics {
        rise_time: None,
        peak_overshoot: None,
        settling_time: None,
        steady_state_error: y_inf.abs(),
        iae,
        itae,
        isc,
        final_value: y_inf,
        degenerate: span == 0.0,
        pole_fell,
    };
    if m.degenerate {
        return Ok(m);
    }
    let r: Vec<f64> = y.iter().map(|v| 1.0 - (v - y_inf) / span).collect();
    if let (Some(t10), Some(t90)) = (first_reach(times, &r, 0.1), first_reach(times, &r, 0.9)) {
        m.rise_time = Some(t90 - t10);
    }
    let peak = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m.peak_overshoot = Some(100.0 * (peak - 1.0).max(0.0));
    if !pole_fell {
        let dev: Vec<f64> = r.iter().map(|v| (v - 1.0).abs()).collect();
        m.settling_time = match dev.iter().rposition(|d| *d > band) {
            None => Some(times[0]),
            Some(k) if k + 1 == n => None,
            Some(k) => Some(crossing(times[k], times[k + 1], dev[k], dev[k + 1], band)),
        };
    }
    Ok(m)
}

/// Standard deviation of `u` about its own lowpassed version.
pub fn control_ripple(trace: &SimTrace, tau: f64) -> f64 {
    let u = &trace.controls;
    if u.len() < 2 {
        return 0.0;
    }
    let mut y = u[0];
    let resid: Vec<f64> = u
        .iter()
        .map(|x| {
            y = lowpass_filter(*x, y, tau, trace.dt);
            x - y
        })
        .collect();
    let mean = resid.iter().sum::<f64>() / resid.len() as f64;
    (resid.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / resid.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HardwareConstants {
    /// Neurons per mm².
    pub neuron_density: f64,
    pub neurons_per_core: usize,
    /// mm².
    pub area_per_core: f64,
    /// pJ per synaptic operation.
    pub e_synop: f64,
    /// pJ per neuron update.
    pub e_neuron_update: f64,
    /// W.
    pub cpu_tdp: f64,
}

/// Peak Loihi density: 128 cores of 1024 neurons on a 60 mm² die, about
/// 2184.5 per mm². The rounded 2184 misplaces the n = 32 area entry.
pub const LOIHI_NEURON_DENSITY: f64 = 128.0 * 1024.0 / 60.0;

impl Default for HardwareConstants {
    fn default() -> Self {
        HardwareConstants {
            neuron_density: LOIHI_NEURON_DENSITY,
            neurons_per_core: 1024,
            area_per_core: 0.41,
            e_synop: 23.6,
            e_neuron_update: 81.0,
            cpu_tdp: 95.0,
        }
    }
}

impl HardwareConstants {
    pub fn validate(&self) -> Result<()> {
        let ok = [
            self.neuron_density,
            self.area_per_core,
            self.e_synop,
            self.e_neuron_update,
            self.cpu_tdp,
        ]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite());
        if ok && self.neurons_per_core > 0 {
            Ok(())
        } else {
            Err(invalid("hardware", "all constants must be finite and > 0"))
        }
    }
}

/// mm².
pub fn theoretical_chip_area(n_neurons: usize, hw: &HardwareConstants) -> f64 {
    n_neurons as f64 / hw.neuron_density
}

/// Percent of each occupied core and the number of cores.
pub fn core_utilization(n_neurons: usize, hw: &HardwareConstants) -> (f64, usize) {
    let cores = n_neurons.div_ceil(hw.neurons_per_core).max(1);
    (
        100.0 * n_neurons as f64 / (cores * hw.neurons_per_core) as f64,
        cores,
    )
}

/// mm².
pub fn experimental_chip_area(utilization_pct: f64, n_cores: usize, hw: &HardwareConstants) -> f64 {
    hw.area_per_core * utilization_pct / 100.0 * n_cores as f64
}

/// J.
pub fn estimated_cpu_energy(wall_time: f64, cpu_utilization: f64, hw: &HardwareConstants) -> f64 {
    wall_time * cpu_utilization * hw.cpu_tdp
}

/// µJ per inference.
pub fn estimated_loihi_energy(synops: f64, neuron_updates: f64, hw: &HardwareConstants) -> f64 {
    (synops * hw.e_synop + neuron_updates * hw.e_neuron_update) * 1e-6
}

pub fn spikes_per_neuron(trace: &SimTrace) -> f64 {
    if trace.n_neurons == 0 {
        0.0
    } else {
        trace.raster.len() as f64 / trace.n_neurons as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuromorphicMetrics {
    pub spikes_per_neuron: f64,
    pub core_utilization: f64,
    pub n_cores: usize,
    /// mm².
    pub area_experimental: f64,
    /// mm².
    pub area_theoretical: f64,
    /// µJ per inference.
    pub energy_loihi: f64,
    /// J; `None` when no wall time was measured.
    pub energy_cpu: Option<f64>,
}

/// `wall` is `(seconds, cpu utilization fraction)` when measured.
pub fn neuromorphic_metrics(
    trace: &SimTrace,
    hw: &HardwareConstants,
    wall: Option<(f64, f64)>,
) -> NeuromorphicMetrics {
    let n = trace.n_neurons;
    let (util, cores) = if n == 0 {
        (0.0, 0)
    } else {
        core_utilization(n, hw)
    };
    let per_inf = |c: u64| {
        if trace.inferences == 0 {
            0.0
        } else {
            c as f64 / trace.inferences as f64
        }
    };
    NeuromorphicMetrics {
        spikes_per_neuron: spikes_per_neuron(trace),
        core_utilization: util,
        n_cores: cores,
        area_experimental: experimental_chip_area(util, cores, hw),
        area_theoretical: theoretical_chip_area(n, hw),
        energy_loihi: estimated_loihi_energy(
            per_inf(trace.synops),
            per_inf(trace.neuron_updates),
            hw,
        ),
        energy_cpu: wall.map(|(t, util)| estimated_cpu_energy(t, util, hw)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_examples() {
        let hw = HardwareConstants::default();
        assert!((theoretical_chip_area(2184, &hw) - 2184.0 / 2184.533).abs() < 1e-6);
        let rounded = HardwareConstants {
            neuron_density: 2184.0,
            ..hw
        };
        assert_eq!(theoretical_chip_area(2184, &rounded), 1.0);
        assert!((theoretical_chip_area(2048, &hw) - 0.9375).abs() < 1e-15);
        assert_eq!(core_utilization(128, &hw), (12.5, 1));
        assert_eq!(core_utilization(2048, &hw), (100.0, 2));
        assert!((core_utilization(1, &hw).0 - 0.0977).abs() < 1e-4);
        assert!((experimental_chip_area(100.0, 1, &hw) - 0.41).abs() < 1e-15);
        assert_eq!(experimental_chip_area(0.0, 3, &hw), 0.0);
        assert!((estimated_cpu_energy(10.0, 0.5, &hw) - 475.0).abs() < 1e-12);
        assert!((estimated_loihi_energy(1000.0, 100.0, &hw) - 0.0317).abs() < 1e-12);
        assert_eq!(estimated_loihi_energy(0.0, 0.0, &hw), 0.0);
    }

    #[test]
    fn overshoot_definition() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
        let y = [0.0, 1.3, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        let m = metrics_from_signal(&t, &y, &[0.0; 10], 0.05, false).unwrap();
        assert!((m.peak_overshoot.unwrap() - 30.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_is_flagged() {
        let m = metrics_from_signal(&[0.0, 1.0], &[0.0, 0.0], &[0.0, 0.0], 0.05, false).unwrap();
        assert!(m.degenerate);
        assert!(m.rise_time.is_none() && m.settling_time.is_none() && m.peak_overshoot.is_none());
    }
}
