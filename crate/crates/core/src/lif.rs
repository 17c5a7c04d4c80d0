//! Leaky integrate-and-fire neurons and rate-coded weighted-sum control.
//!
//! Membrane: `C dV/dt = −g_leak (V − V_leak) + I_syn`, forward Euler, reset
//! to `V_leak` on reaching `V_th`. Each input spike carries charge
//! `w · I_mag` into a first-order synapse with time constant `tau_syn`
//! (`tau_syn = 0` delivers the charge within one step). With negligible leak
//! the output frequency is `gain_K · Σ w_i f_i`, `gain_K = I_mag / (V_th C)`.

use serde::{Deserialize, Serialize};

use crate::dynamics::StateVec;
use crate::error::{invalid, Error, Result};
use crate::lqr::GainVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LifParams {
    pub c_mem: f64,
    pub g_leak: f64,
    pub v_leak: f64,
    pub v_th: f64,
    pub tau_syn: f64,
    pub refractory: f64,
    pub i_mag: f64,
}

impl Default for LifParams {
    /// Board-like neuron: τ_mem = 100 s, unit threshold, instantaneous synapse.
    fn default() -> Self {
        LifParams {
            c_mem: 1.0,
            g_leak: 0.01,
            v_leak: 0.0,
            v_th: 1.0,
            tau_syn: 0.0,
            refractory: 0.0,
            i_mag: 1.0,
        }
    }
}

impl LifParams {
    /// Neuron for the two-neuron cartpole controller: slow leak, a 1 ms
    /// synapse and `gain_K = 1e-4`, which keeps output rates near a few
    /// hundred Hz at 10 kHz-per-unit encoding.
    pub fn two_neuron() -> Self {
        LifParams {
            tau_syn: 1e-3,
            i_mag: 1e-4,
            ..LifParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_mem > 0.0) {
            return Err(invalid("c_mem", format!("must be > 0, got {}", self.c_mem)));
        }
        if !(self.g_leak >= 0.0) {
            return Err(invalid(
                "g_leak",
                format!("must be >= 0, got {}", self.g_leak),
            ));
        }
        if !(self.v_th > self.v_leak) {
            return Err(invalid("v_th", "must exceed v_leak"));
        }
        if !(self.tau_syn >= 0.0) {
            return Err(invalid(
                "tau_syn",
                format!("must be >= 0, got {}", self.tau_syn),
            ));
        }
        if !(self.refractory >= 0.0) {
            return Err(invalid(
                "refractory",
                format!("must be >= 0, got {}", self.refractory),
            ));
        }
        if !(self.i_mag > 0.0 && self.i_mag.is_finite()) {
            return Err(invalid("i_mag", format!("must be > 0, got {}", self.i_mag)));
        }
        Ok(())
    }

    /// `C_mem / g_leak`; infinite without leak.
    pub fn tau_mem(&self) -> f64 {
        self.c_mem / self.g_leak
    }

    pub fn gain_k(&self) -> f64 {
        self.i_mag / (self.v_th * self.c_mem)
    }

    /// Sets `i_mag` so that `gain_k()` equals `k`.
    pub fn with_gain_k(mut self, k: f64) -> Self {
        self.i_mag = k * self.v_th * self.c_mem;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifState {
    pub v_mem: f64,
    pub i_syn: f64,
    pub time_since_spike: f64,
}

impl LifState {
    pub fn rest(params: &LifParams) -> Self {
        LifState {
            v_mem: params.v_leak,
            i_syn: 0.0,
            time_since_spike: f64::INFINITY,
        }
    }
}

/// One forward-Euler membrane step driven by `input_current`.
pub fn lif_step(
    params: &LifParams,
    state: &LifState,
    input_current: f64,
    dt: f64,
) -> (LifState, bool) {
    debug_assert!(dt > 0.0);
    let mut next = *state;
    next.time_since_spike += dt;
    if state.time_since_spike < params.refractory {
        next.v_mem = params.v_leak;
        return (next, false);
    }
    let dv = (-params.g_leak * (state.v_mem - params.v_leak) + input_current) / params.c_mem;
    next.v_mem = state.v_mem + dt * dv;
    if next.v_mem >= params.v_th {
        next.v_mem = params.v_leak;
        next.time_since_spike = 0.0;
        return (next, true);
    }
    (next, false)
}

/// Advances the synapse by one step with `charge` arriving in it, then the
/// membrane. The synaptic jump is scaled so each spike delivers exactly its
/// charge on the discrete grid.
pub fn lif_step_charge(
    params: &LifParams,
    state: &LifState,
    charge: f64,
    dt: f64,
) -> (LifState, bool) {
    if params.tau_syn > 0.0 {
        let decay = (-dt / params.tau_syn).exp();
        let i_syn = state.i_syn * decay + charge * (1.0 - decay) / dt;
        lif_step(params, &LifState { i_syn, ..*state }, i_syn, dt)
    } else {
        let (next, spiked) = lif_step(params, state, charge / dt, dt);
        (LifState { i_syn: 0.0, ..next }, spiked)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeTrain {
    pub neuron_id: usize,
    pub spike_times: Vec<f64>,
    pub horizon: f64,
}

impl SpikeTrain {
    pub fn new(neuron_id: usize, spike_times: Vec<f64>, horizon: f64) -> Result<Self> {
        if spike_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("spike_times", "must be strictly increasing"));
        }
        if spike_times.first().is_some_and(|t| *t < 0.0)
            || spike_times.last().is_some_and(|t| *t > horizon)
        {
            return Err(invalid("spike_times", "must lie in [0, horizon]"));
        }
        Ok(SpikeTrain {
            neuron_id,
            spike_times,
            horizon,
        })
    }

    pub fn empty(neuron_id: usize, horizon: f64) -> Self {
        SpikeTrain {
            neuron_id,
            spike_times: Vec::new(),
            horizon,
        }
    }

    pub fn len(&self) -> usize {
        self.spike_times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spike_times.is_empty()
    }
}

/// Regular train at `value · scale` Hz: spikes at multiples of the period,
/// snapped to the `dt` grid. Rates above `1/dt` saturate at one spike per step.
pub fn rate_encode(value: f64, scale: f64, horizon: f64, dt: f64) -> SpikeTrain {
    assert!(
        value >= 0.0 && scale > 0.0 && dt > 0.0,
        "rate_encode needs value >= 0, scale > 0, dt > 0"
    );
    let freq = value * scale;
    if freq <= 0.0 || !freq.is_finite() {
        return SpikeTrain::empty(0, horizon);
    }
    let period = 1.0 / freq;
    let last_step = (horizon / dt + 1e-9).floor() as i64;
    let mut times = Vec::with_capacity((horizon * freq) as usize + 1);
    let mut prev_step = -1i64;
    let mut k = 1u64;
    loop {
        let t = k as f64 * period;
        if t > horizon * (1.0 + 1e-12) {
            break;
        }
        let step = ((t / dt).round() as i64).min(last_step);
        if step > prev_step {
            times.push(step as f64 * dt);
            prev_step = step;
        }
        k += 1;
    }
    SpikeTrain {
        neuron_id: 0,
        spike_times: times,
        horizon,
    }
}

/// Spike count in the trailing `window` ending at the train's horizon,
/// divided by the window.
pub fn count_decode(train: &SpikeTrain, window: f64) -> f64 {
    assert!(window > 0.0, "window must be > 0");
    let start = train.horizon - window;
    let eps = 1e-9 * window;
    let n = train
        .spike_times
        .iter()
        .filter(|t| **t > start + eps || (start <= eps && **t >= 0.0))
        .count();
    n as f64 / window
}

/// Mean-interval frequency `(n − 1) / (t_last − t_first)`; falls back to
/// count over horizon for fewer than two spikes.
pub fn isi_frequency(train: &SpikeTrain) -> f64 {
    match train.spike_times.as_slice() {
        [first, .., last] if last > first => (train.len() - 1) as f64 / (last - first),
        _ if train.horizon > 0.0 => train.len() as f64 / train.horizon,
        _ => 0.0,
    }
}

/// Simulates one neuron from rest with a per-step charge sequence and
/// returns the steps at which it spiked.
pub fn simulate_charges(params: &LifParams, charges: &[f64], dt: f64) -> Vec<usize> {
    let mut state = LifState::rest(params);
    let mut spikes = Vec::new();
    for (k, q) in charges.iter().enumerate() {
        let (next, spiked) = lif_step_charge(params, &state, *q, dt);
        state = next;
        if spiked {
            spikes.push(k);
        }
    }
    spikes
}

fn charge_grid(
    params: &LifParams,
    inputs: &[SpikeTrain],
    weights: &[f64],
    horizon: f64,
    dt: f64,
) -> Vec<f64> {
    let steps = (horizon / dt + 1e-9).floor() as usize + 1;
    let mut charges = vec![0.0; steps];
    for (train, w) in inputs.iter().zip(weights) {
        for t in &train.spike_times {
            let k = (t / dt).round() as usize;
            if k < steps {
                charges[k] += w * params.i_mag;
            }
        }
    }
    charges
}

/// One LIF neuron summing weighted input trains over `[0, horizon]`.
pub fn weighted_sum_neuron(
    params: &LifParams,
    inputs: &[SpikeTrain],
    weights: &[f64],
    horizon: f64,
    dt: f64,
) -> Result<SpikeTrain> {
    params.validate()?;
    if inputs.len() != weights.len() {
        return Err(Error::Dimension {
            expected: inputs.len(),
            got: weights.len(),
        });
    }
    if !(dt > 0.0 && horizon > 0.0) {
        return Err(invalid("dt", "dt and horizon must be > 0"));
    }
    let charges = charge_grid(params, inputs, weights, horizon, dt);
    let times = simulate_charges(params, &charges, dt)
        .into_iter()
        .map(|k| k as f64 * dt)
        .collect();
    Ok(SpikeTrain {
        neuron_id: 0,
        spike_times: times,
        horizon,
    })
}

pub const LUI_MAX_SYNAPSES: usize = 3;

/// Software stand-in for the three-input analog neuron board.
#[derive(Debug, Clone, PartialEq)]
pub struct LuiBoard {
    params: LifParams,
    weights: Vec<f64>,
}

impl LuiBoard {
    pub fn new(params: LifParams, weights: Vec<f64>) -> Result<Self> {
        params.validate()?;
        if weights.len() > LUI_MAX_SYNAPSES {
            return Err(Error::TooManySynapses {
                max: LUI_MAX_SYNAPSES,
                got: weights.len(),
            });
        }
        Ok(LuiBoard { params, weights })
    }

    pub fn params(&self) -> &LifParams {
        &self.params
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn run(&self, inputs: &[SpikeTrain], horizon: f64, dt: f64) -> Result<SpikeTrain> {
        if inputs.len() > LUI_MAX_SYNAPSES {
            return Err(Error::TooManySynapses {
                max: LUI_MAX_SYNAPSES,
                got: inputs.len(),
            });
        }
        weighted_sum_neuron(&self.params, inputs, &self.weights, horizon, dt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dendrites {
    /// One synapse per state component.
    All,
    /// Cart position left out.
    NoCartPosition,
}

impl Dendrites {
    /// Synapses used for a plant with `n_links` links.
    pub fn count(self, n_links: usize) -> usize {
        match self {
            Dendrites::All => 2 * n_links + 2,
            Dendrites::NoCartPosition => 2 * n_links + 1,
        }
    }
}

/// Settings of a windowed rate-coded controller call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateCodedConfig {
    /// Hz per unit of state.
    pub encode_scale: f64,
    /// Spike-count window per decision (neuron time).
    pub window: f64,
    pub neuron_dt: f64,
    pub dendrites: Dendrites,
}

impl Default for RateCodedConfig {
    fn default() -> Self {
        RateCodedConfig {
            encode_scale: 1e4,
            window: 0.5,
            neuron_dt: 1e-5,
            dendrites: Dendrites::All,
        }
    }
}

impl RateCodedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.encode_scale > 0.0) {
            return Err(invalid("encode_scale", "must be > 0"));
        }
        if !(self.window > 0.0) {
            return Err(invalid("window", "must be > 0"));
        }
        if !(self.neuron_dt > 0.0 && self.neuron_dt < self.window) {
            return Err(invalid("neuron_dt", "must be > 0 and below the window"));
        }
        Ok(())
    }
}

/// Result of one rate-coded decision.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCodedOutput {
    pub u: f64,
    pub f_pos: f64,
    pub f_neg: f64,
    /// Output spike times (window-relative) of the positive and negative
    /// pathway neurons.
    pub spikes: [Vec<f64>; 2],
}

fn dendrite_indices(state: &StateVec, dendrites: Dendrites) -> Vec<usize> {
    match dendrites {
        Dendrites::All => (0..state.len()).collect(),
        Dendrites::NoCartPosition => (1..state.len()).collect(),
    }
}

/// Two-neuron rate-coded LQR: state magnitudes are rate encoded; the
/// positive-pathway neuron receives weights `K_i·sign(X_i)`, the negative one
/// the opposite, so exactly one of them is driven by `K·X`. Returns
/// `u = −(f_pos − f_neg) / (encode_scale · gain_K)`.
pub fn two_neuron_control(
    params: &LifParams,
    state: &StateVec,
    k: &GainVector,
    cfg: &RateCodedConfig,
) -> RateCodedOutput {
    let idx = dendrite_indices(state, cfg.dendrites);
    let x = state.as_slice();
    let trains: Vec<SpikeTrain> = idx
        .iter()
        .map(|&i| rate_encode(x[i].abs(), cfg.encode_scale, cfg.window, cfg.neuron_dt))
        .collect();
    let signed: Vec<f64> = idx.iter().map(|&i| k.0[i] * signum(x[i])).collect();
    let negated: Vec<f64> = signed.iter().map(|w| -w).collect();
    let pos = weighted_sum_neuron(params, &trains, &signed, cfg.window, cfg.neuron_dt)
        .expect("validated params");
    let neg = weighted_sum_neuron(params, &trains, &negated, cfg.window, cfg.neuron_dt)
        .expect("validated params");
    let f_pos = count_decode(&pos, cfg.window);
    let f_neg = count_decode(&neg, cfg.window);
    RateCodedOutput {
        u: -(f_pos - f_neg) / (cfg.encode_scale * params.gain_k()),
        f_pos,
        f_neg,
        spikes: [pos.spike_times, neg.spike_times],
    }
}

/// Single-board variant: the sign of `o = K·X` is computed up front and the
/// board only ever sees a nonnegative drive `|o|` through at most three
/// synapses (cart position is dropped). The sign is reapplied to the decoded
/// magnitude.
pub fn lui_control(
    params: &LifParams,
    state: &StateVec,
    k: &GainVector,
    cfg: &RateCodedConfig,
) -> Result<RateCodedOutput> {
    let idx = dendrite_indices(state, cfg.dendrites);
    if idx.len() > LUI_MAX_SYNAPSES {
        return Err(Error::TooManySynapses {
            max: LUI_MAX_SYNAPSES,
            got: idx.len(),
        });
    }
    let x = state.as_slice();
    let o: f64 = idx.iter().map(|&i| k.0[i] * x[i]).sum();
    let sign = signum(o);
    let trains: Vec<SpikeTrain> = idx
        .iter()
        .map(|&i| rate_encode(x[i].abs(), cfg.encode_scale, cfg.window, cfg.neuron_dt))
        .collect();
    let weights: Vec<f64> = idx.iter().map(|&i| k.0[i] * signum(x[i]) * sign).collect();
    let board = LuiBoard::new(*params, weights)?;
    let out = board.run(&trains, cfg.window, cfg.neuron_dt)?;
    let f = count_decode(&out, cfg.window);
    let (f_pos, f_neg, spikes) = if sign >= 0.0 {
        (f, 0.0, [out.spike_times, Vec::new()])
    } else {
        (0.0, f, [Vec::new(), out.spike_times])
    };
    Ok(RateCodedOutput {
        u: -(f_pos - f_neg) / (cfg.encode_scale * params.gain_k()),
        f_pos,
        f_neg,
        spikes,
    })
}

fn signum(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_is_stationary() {
        let p = LifParams::default();
        let s = LifState::rest(&p);
        let (n, spiked) = lif_step(&p, &s, 0.0, 1e-3);
        assert!(!spiked);
        assert_eq!(n.v_mem, s.v_mem);
    }

    #[test]
    fn subthreshold_current_never_fires() {
        let p = LifParams {
            g_leak: 1.0,
            ..LifParams::default()
        };
        let mut s = LifState::rest(&p);
        for _ in 0..100_000 {
            let (n, spiked) = lif_step(&p, &s, 0.9, 1e-3);
            assert!(!spiked);
            s = n;
        }
        assert!((s.v_mem - 0.9).abs() < 1e-6);
    }

    #[test]
    fn rate_encoding_definition() {
        assert!(rate_encode(0.0, 10.0, 1.0, 1e-3).is_empty());
        let t = rate_encode(1.0, 10.0, 1.0, 1e-4);
        assert_eq!(t.len(), 10);
        for (i, w) in t.spike_times.windows(2).enumerate() {
            assert!((w[1] - w[0] - 0.1).abs() < 1e-9, "gap {i}");
        }
        assert_eq!(rate_encode(0.5, 1e4, 0.1, 1e-5).len(), 500);
    }

    #[test]
    fn count_decoding() {
        assert_eq!(count_decode(&SpikeTrain::empty(0, 1.0), 0.5), 0.0);
        let t = SpikeTrain::new(0, (1..=10).map(|k| k as f64 * 0.05).collect(), 0.5).unwrap();
        assert!((count_decode(&t, 0.5) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn spike_train_invariants() {
        assert!(SpikeTrain::new(0, vec![0.2, 0.1], 1.0).is_err());
        assert!(SpikeTrain::new(0, vec![0.1, 0.1], 1.0).is_err());
        assert!(SpikeTrain::new(0, vec![0.5, 1.5], 1.0).is_err());
    }

    #[test]
    fn lui_board_rejects_fourth_synapse() {
        let err = LuiBoard::new(LifParams::default(), vec![1.0; 4]).unwrap_err();
        assert_eq!(err, Error::TooManySynapses { max: 3, got: 4 });
        let p = LifParams::default();
        let cfg = RateCodedConfig::default();
        let k = GainVector(vec![1.0; 4]);
        assert!(lui_control(&p, &StateVec::from_angles(&[0.1]), &k, &cfg).is_err());
    }

    #[test]
    fn invalid_params() {
        let bad = LifParams {
            v_th: -1.0,
            ..LifParams::default()
        };
        assert!(bad.validate().is_err());
        assert!(LifParams {
            c_mem: 0.0,
            ..LifParams::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn tau_mem_accessor() {
        assert!((LifParams::default().tau_mem() - 100.0).abs() < 1e-12);
        assert_eq!(LifParams::default().with_gain_k(0.25).gain_k(), 0.25);
    }
}
