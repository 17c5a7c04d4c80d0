//! Closed-loop harness: plant integration under zero-order-hold control by
//! classical and spiking controllers.

use serde::{Deserialize, Serialize};

use crate::dynamics::{rk4_step, StateVec, SystemParams};
use crate::error::{invalid, Error, Result};
use crate::lif::{
    lui_control, two_neuron_control, LifParams, RateCodedConfig, RateCodedOutput, LUI_MAX_SYNAPSES,
};
use crate::lqr::GainVector;
use crate::nef::{Ensemble, EnsembleSpec};

pub const PID_KP: f64 = 190.61;
pub const PID_KD: f64 = 78.26;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidParams {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidParams {
    /// Angle-loop gains of the Ki study with the given integral gain.
    pub fn angle_loop(ki: f64) -> Self {
        PidParams {
            kp: PID_KP,
            ki,
            kd: PID_KD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [self.kp, self.ki, self.kd].iter().all(|g| g.is_finite()) {
            Ok(())
        } else {
            Err(invalid("pid", "gains must be finite"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmcParams {
    pub c: f64,
    pub k: f64,
    pub phi: f64,
}

impl Default for SmcParams {
    fn default() -> Self {
        SmcParams {
            c: 5.0,
            k: 50.0,
            phi: 0.05,
        }
    }
}

impl SmcParams {
    pub fn validate(&self) -> Result<()> {
        if self.c > 0.0 && self.k > 0.0 && self.phi > 0.0 {
            Ok(())
        } else {
            Err(invalid("smc", "c, k and phi must be > 0"))
        }
    }
}

/// Regulator output `Kp e + Ki ∫e + Kd ė`.
pub fn pid_control(pid: &PidParams, e: f64, e_int: f64, e_dot: f64) -> f64 {
    pid.kp * e + pid.ki * e_int + pid.kd * e_dot
}

/// `u = −k · sat((c e + ė) / φ)`.
pub fn smc_control(smc: &SmcParams, e: f64, e_dot: f64) -> f64 {
    let s = smc.c * e + e_dot;
    -smc.k * (s / smc.phi).clamp(-1.0, 1.0)
}

/// How the represented range of an ensemble is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RadiusRule {
    Fixed {
        radius: f64,
    },
    /// `factor × max|command|` of the matching non-spiking controller run
    /// from the same initial state.
    Calibrated {
        factor: f64,
    },
}

impl Default for RadiusRule {
    fn default() -> Self {
        RadiusRule::Calibrated { factor: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControllerConfig {
    /// `u ≡ 0`.
    Open,
    Lqr {
        gain: GainVector,
    },
    Pid {
        pid: PidParams,
    },
    Smc {
        smc: SmcParams,
    },
    /// Two rate-coded LIF neurons, one per sign of `K·X`.
    SpikingLqrTwoNeuron {
        gain: GainVector,
        lif: LifParams,
        coding: RateCodedConfig,
    },
    /// One three-input board neuron with the sign computed outside it.
    SpikingLqrLui {
        gain: GainVector,
        lif: LifParams,
        coding: RateCodedConfig,
    },
    SpikingLqrEnsemble {
        gain: GainVector,
        ensemble: EnsembleSpec,
        radius: RadiusRule,
    },
    SpikingPid {
        pid: PidParams,
        ensemble: EnsembleSpec,
        radius: RadiusRule,
    },
}

impl ControllerConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerConfig::Open => "open",
            ControllerConfig::Lqr { .. } => "lqr",
            ControllerConfig::Pid { .. } => "pid",
            ControllerConfig::Smc { .. } => "smc",
            ControllerConfig::SpikingLqrTwoNeuron { .. } => "spiking-lqr-2",
            ControllerConfig::SpikingLqrLui { .. } => "spiking-lqr-lui",
            ControllerConfig::SpikingLqrEnsemble { .. } => "spiking-lqr-ensemble",
            ControllerConfig::SpikingPid { .. } => "spiking-pid",
        }
    }

    pub fn is_spiking(&self) -> bool {
        matches!(
            self,
            ControllerConfig::SpikingLqrTwoNeuron { .. }
                | ControllerConfig::SpikingLqrLui { .. }
                | ControllerConfig::SpikingLqrEnsemble { .. }
                | ControllerConfig::SpikingPid { .. }
        )
    }

    pub fn gain(&self) -> Option<&GainVector> {
        match self {
            ControllerConfig::Lqr { gain }
            | ControllerConfig::SpikingLqrTwoNeuron { gain, .. }
            | ControllerConfig::SpikingLqrLui { gain, .. }
            | ControllerConfig::SpikingLqrEnsemble { gain, .. } => Some(gain),
            _ => None,
        }
    }

    fn validate(&self, params: &SystemParams) -> Result<()> {
        if let Some(g) = self.gain() {
            if g.len() != params.state_dim() {
                return Err(Error::Dimension {
                    expected: params.state_dim(),
                    got: g.len(),
                });
            }
            if g.0.iter().any(|k| !k.is_finite()) {
                return Err(invalid("gain", "entries must be finite"));
            }
        }
        match self {
            ControllerConfig::Pid { pid } => pid.validate(),
            ControllerConfig::Smc { smc } => smc.validate(),
            ControllerConfig::SpikingLqrTwoNeuron { lif, coding, .. } => {
                lif.validate()?;
                coding.validate()
            }
            ControllerConfig::SpikingLqrLui { lif, coding, .. } => {
                let synapses = coding.dendrites.count(params.n_links());
                if synapses > LUI_MAX_SYNAPSES {
                    return Err(Error::TooManySynapses {
                        max: LUI_MAX_SYNAPSES,
                        got: synapses,
                    });
                }
                lif.validate()?;
                coding.validate()
            }
            ControllerConfig::SpikingLqrEnsemble {
                ensemble, radius, ..
            } => {
                validate_radius(radius)?;
                ensemble.validate()
            }
            ControllerConfig::SpikingPid {
                pid,
                ensemble,
                radius,
            } => {
                validate_radius(radius)?;
                pid.validate()?;
                ensemble.validate()
            }
            _ => Ok(()),
        }
    }
}

fn validate_radius(rule: &RadiusRule) -> Result<()> {
    match *rule {
        RadiusRule::Fixed { radius } if !(radius > 0.0) => Err(invalid("radius", "must be > 0")),
        RadiusRule::Calibrated { factor } if !(factor > 0.0) => {
            Err(invalid("radius.factor", "must be > 0"))
        }
        _ => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    pub duration: f64,
    /// Plant integration step.
    pub dt: f64,
    /// Controller update interval; a whole multiple of `dt`.
    pub control_period: f64,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            duration: 10.0,
            dt: 1e-3,
            control_period: 1e-3,
        }
    }
}

impl SimSettings {
    fn hold_steps(&self) -> Result<usize> {
        if !(self.duration > 0.0) {
            return Err(invalid("duration", "must be > 0"));
        }
        if !(self.dt > 0.0) {
            return Err(invalid("dt", "must be > 0"));
        }
        let ratio = (self.control_period / self.dt).round();
        if ratio < 1.0 || (ratio * self.dt - self.control_period).abs() > 1e-9 * self.control_period
        {
            return Err(invalid(
                "control_period",
                format!(
                    "must be a whole multiple of dt ({}), got {}",
                    self.dt, self.control_period
                ),
            ));
        }
        Ok(ratio as usize)
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum SimOutcome {
    Completed,
    /// A link passed horizontal (or the state stopped being finite).
    PoleFell {
        time: f64,
        link: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spike {
    pub t: f64,
    pub neuron: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub dt: f64,
    pub times: Vec<f64>,
    pub states: Vec<StateVec>,
    pub controls: Vec<f64>,
    pub raster: Vec<Spike>,
    pub n_neurons: usize,
    /// Synaptic events and neuron state updates, summed over the run.
    pub synops: u64,
    pub neuron_updates: u64,
    pub inferences: u64,
    /// Radius the ensemble used, if any.
    pub radius: Option<f64>,
    pub outcome: SimOutcome,
    pub seed: u64,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channel(&self, index: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.as_slice()[index]).collect()
    }

    pub fn succeeded(&self) -> bool {
        self.outcome == SimOutcome::Completed
    }
}

/// `u = −(decoded K·X)` with the ensemble representing `K·X`.
pub fn spiking_lqr_ensemble_control(
    k: &GainVector,
    ensemble: &mut Ensemble,
    state: &StateVec,
    dt: f64,
    spikes: &mut Vec<usize>,
) -> f64 {
    -ensemble.step(k.dot(state), dt, spikes)
}

struct PidMemory {
    e_int: f64,
    e_prev: Option<f64>,
}

impl PidMemory {
    fn new() -> Self {
        PidMemory {
            e_int: 0.0,
            e_prev: None,
        }
    }

    /// Angle error of the first link; integral by trapezoid, rate by
    /// backward difference.
    fn update(&mut self, state: &StateVec, period: f64) -> (f64, f64, f64) {
        let e = -state.theta(0);
        let (e_int, e_dot) = match self.e_prev {
            Some(prev) => (self.e_int + 0.5 * period * (e + prev), (e - prev) / period),
            None => (0.0, 0.0),
        };
        self.e_int = e_int;
        self.e_prev = Some(e);
        (e, e_int, e_dot)
    }
}

enum Runtime {
    Open,
    Lqr(GainVector),
    Pid(PidParams, PidMemory),
    Smc(SmcParams),
    RateCoded {
        gain: GainVector,
        lif: LifParams,
        coding: RateCodedConfig,
        lui: bool,
    },
    Ensemble {
        gain: GainVector,
        ensemble: Box<Ensemble>,
    },
    SpikingPid {
        pid: PidParams,
        memory: PidMemory,
        ensemble: Box<Ensemble>,
    },
}

#[derive(Default)]
struct StepRecord {
    spikes: Vec<(f64, u32)>,
    synops: u64,
    neuron_updates: u64,
}

impl Runtime {
    /// Force on the cart for the coming hold interval. The regulator
    /// commands of PID and spiking PID are negated because the angle
    /// responds to cart force with negative gain.
    fn control(&mut self, state: &StateVec, period: f64, record: &mut StepRecord) -> f64 {
        match self {
            Runtime::Open => 0.0,
            Runtime::Lqr(k) => k.control(state),
            Runtime::Pid(pid, mem) => {
                let (e, ei, ed) = mem.update(state, period);
                -pid_control(pid, e, ei, ed)
            }
            Runtime::Smc(smc) => smc_control(smc, -state.theta(0), -state.theta_dot(0)),
            Runtime::RateCoded {
                gain,
                lif,
                coding,
                lui,
            } => {
                let out: RateCodedOutput = if *lui {
                    lui_control(lif, state, gain, coding).expect("validated before the run")
                } else {
                    two_neuron_control(lif, state, gain, coding)
                };
                let squeeze = period / coding.window;
                for (neuron, times) in out.spikes.iter().enumerate() {
                    record
                        .spikes
                        .extend(times.iter().map(|t| (t * squeeze, neuron as u32)));
                }
                let inputs: f64 = state
                    .as_slice()
                    .iter()
                    .map(|x| (x.abs() * coding.encode_scale * coding.window).floor())
                    .sum();
                let neurons = if *lui { 1 } else { 2 };
                record.synops += (inputs as u64) * neurons;
                record.neuron_updates +=
                    neurons * (coding.window / coding.neuron_dt).round() as u64;
                out.u
            }
            Runtime::Ensemble { gain, ensemble } => {
                let mut idx = Vec::new();
                let u = spiking_lqr_ensemble_control(gain, ensemble, state, period, &mut idx);
                Self::record_ensemble(ensemble.n_neurons(), &idx, record);
                u
            }
            Runtime::SpikingPid {
                pid,
                memory,
                ensemble,
            } => {
                let (e, ei, ed) = memory.update(state, period);
                let v = pid_control(pid, e, ei, ed);
                let mut idx = Vec::new();
                let decoded = ensemble.step(v, period, &mut idx);
                Self::record_ensemble(ensemble.n_neurons(), &idx, record);
                -decoded
            }
        }
    }

    /// Every neuron receives the represented input and every spike feeds
    /// the decoded output.
    fn record_ensemble(n: usize, idx: &[usize], record: &mut StepRecord) {
        record.spikes.extend(idx.iter().map(|i| (0.0, *i as u32)));
        record.synops += (n + idx.len()) as u64;
        record.neuron_updates += n as u64;
    }

    fn n_neurons(&self) -> usize {
        match self {
            Runtime::RateCoded { lui: true, .. } => 1,
            Runtime::RateCoded { .. } => 2,
            Runtime::Ensemble { ensemble, .. } | Runtime::SpikingPid { ensemble, .. } => {
                ensemble.n_neurons()
            }
            _ => 0,
        }
    }
}

/// Largest |force| (LQR) or |regulator command| (PID) of the matching
/// non-spiking run, scaled by `factor`.
pub fn calibrate_radius(
    params: &SystemParams,
    reference: &ControllerConfig,
    x0: &StateVec,
    settings: &SimSettings,
    factor: f64,
) -> Result<f64> {
    let trace = closed_loop_sim(params, reference, x0, settings, 0)?;
    let peak = trace.controls.iter().fold(0.0f64, |m, u| m.max(u.abs()));
    if peak > 0.0 {
        Ok(factor * peak)
    } else {
        Ok(1.0)
    }
}

fn resolve_radius(
    rule: &RadiusRule,
    params: &SystemParams,
    reference: ControllerConfig,
    x0: &StateVec,
    settings: &SimSettings,
) -> Result<f64> {
    match *rule {
        RadiusRule::Fixed { radius } => Ok(radius),
        RadiusRule::Calibrated { factor } => {
            calibrate_radius(params, &reference, x0, settings, factor)
        }
    }
}

fn build_runtime(
    params: &SystemParams,
    config: &ControllerConfig,
    x0: &StateVec,
    settings: &SimSettings,
    seed: u64,
) -> Result<(Runtime, Option<f64>)> {
    Ok(match config {
        ControllerConfig::Open => (Runtime::Open, None),
        ControllerConfig::Lqr { gain } => (Runtime::Lqr(gain.clone()), None),
        ControllerConfig::Pid { pid } => (Runtime::Pid(*pid, PidMemory::new()), None),
        ControllerConfig::Smc { smc } => (Runtime::Smc(*smc), None),
        ControllerConfig::SpikingLqrTwoNeuron { gain, lif, coding } => (
            Runtime::RateCoded {
                gain: gain.clone(),
                lif: *lif,
                coding: *coding,
                lui: false,
            },
            None,
        ),
        ControllerConfig::SpikingLqrLui { gain, lif, coding } => (
            Runtime::RateCoded {
                gain: gain.clone(),
                lif: *lif,
                coding: *coding,
                lui: true,
            },
            None,
        ),
        ControllerConfig::SpikingLqrEnsemble {
            gain,
            ensemble,
            radius,
        } => {
            let r = resolve_radius(
                radius,
                params,
                ControllerConfig::Lqr { gain: gain.clone() },
                x0,
                settings,
            )?;
            let spec = EnsembleSpec {
                radius: r,
                seed,
                ..ensemble.clone()
            };
            (
                Runtime::Ensemble {
                    gain: gain.clone(),
                    ensemble: Box::new(Ensemble::new(spec)?),
                },
                Some(r),
            )
        }
        ControllerConfig::SpikingPid {
            pid,
            ensemble,
            radius,
        } => {
            // The reference run records forces, which are the negated
            // regulator commands; their magnitudes are what matters.
            let r = resolve_radius(
                radius,
                params,
                ControllerConfig::Pid { pid: *pid },
                x0,
                settings,
            )?;
            let spec = EnsembleSpec {
                radius: r,
                seed,
                ..ensemble.clone()
            };
            (
                Runtime::SpikingPid {
                    pid: *pid,
                    memory: PidMemory::new(),
                    ensemble: Box::new(Ensemble::new(spec)?),
                },
                Some(r),
            )
        }
    })
}

fn fallen_link(state: &StateVec) -> Option<usize> {
    if !state.is_finite() {
        return Some(0);
    }
    state
        .angles()
        .iter()
        .position(|th| th.abs() > std::f64::consts::FRAC_PI_2)
}

/// Runs the loop: every `control_period` the controller sees the current
/// state and its force is held while RK4 advances the plant in `dt` steps.
/// Stops early with [`SimOutcome::PoleFell`] once a link passes horizontal.
pub fn closed_loop_sim(
    params: &SystemParams,
    controller: &ControllerConfig,
    x0: &StateVec,
    settings: &SimSettings,
    seed: u64,
) -> Result<SimTrace> {
    params.validate()?;
    if x0.len() != params.state_dim() {
        return Err(Error::Dimension {
            expected: params.state_dim(),
            got: x0.len(),
        });
    }
    if !x0.is_finite() {
        return Err(invalid("x0", "must be finite"));
    }
    controller.validate(params)?;
    let hold = settings.hold_steps()?;
    let (mut runtime, radius) = build_runtime(params, controller, x0, settings, seed)?;
    let period = hold as f64 * settings.dt;
    let steps = settings.steps();

    let mut trace = SimTrace {
        dt: settings.dt,
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        controls: Vec::with_capacity(steps + 1),
        raster: Vec::new(),
        n_neurons: runtime.n_neurons(),
        synops: 0,
        neuron_updates: 0,
        inferences: 0,
        radius,
        outcome: SimOutcome::Completed,
        seed,
    };
    let mut state = x0.clone();
    let mut u = 0.0;
    let mut record = StepRecord::default();
    for k in 0..=steps {
        let t = k as f64 * settings.dt;
        if let Some(link) = fallen_link(&state) {
            trace.outcome = SimOutcome::PoleFell { time: t, link };
            break;
        }
        if k % hold == 0 {
            record.spikes.clear();
            u = runtime.control(&state, period, &mut record);
            trace.inferences += 1;
            trace
                .raster
                .extend(record.spikes.iter().map(|(dt_in, neuron)| Spike {
                    t: t + dt_in,
                    neuron: *neuron,
                }));
        }
        trace.times.push(t);
        trace.states.push(state.clone());
        trace.controls.push(u);
        if k == steps {
            break;
        }
        state = match rk4_step(params, &state, u, settings.dt) {
            Ok(s) => s,
            Err(Error::Singular(_)) => {
                trace.outcome = SimOutcome::PoleFell {
                    time: t + settings.dt,
                    link: 0,
                };
                break;
            }
            Err(e) => return Err(e),
        };
    }
    trace.synops = record.synops;
    trace.neuron_updates = record.neuron_updates;
    Ok(trace)
}

/// Links released from rest at `0.2 − 0.02 (k − 1)` rad for link `k`.
pub fn multi_link_initial_state(n_links: usize) -> StateVec {
    let angles: Vec<f64> = (0..n_links).map(|k| 0.2 - 0.02 * k as f64).collect();
    StateVec::from_angles(&angles)
}
