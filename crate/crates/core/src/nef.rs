//! One-dimensional NEF-style populations.
//!
//! Values are represented in normalized units `x̂ = x / radius`. Neuron `i`
//! receives `J = α_i e_i x̂ + J_bias,i` and fires at the steady-state LIF rate
//! `a(J) = 1 / (τ_ref − τ_rc ln(1 − 1/J))` for `J > 1`. Decoders are
//! regularized least-squares weights on those rates.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InterceptSpec {
    /// Evenly spaced cell midpoints of `[lo, hi]`, so the values stay strictly
    /// inside the interval.
    Linspace { lo: f64, hi: f64 },
    /// Zero-mean normal, clipped to `±clip`. `sigma = 0` puts every intercept
    /// at zero.
    Normal { sigma: f64, clip: f64 },
    /// Uniform on `[lo, hi)`.
    Uniform { lo: f64, hi: f64 },
}

impl InterceptSpec {
    pub fn symmetric_linspace(half_width: f64) -> Self {
        InterceptSpec::Linspace {
            lo: -half_width,
            hi: half_width,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let inside = |v: f64| v > -1.0 - 1e-12 && v < 1.0;
        match *self {
            InterceptSpec::Linspace { lo, hi } => {
                if !(lo <= hi && lo >= -1.0 && hi <= 1.0) {
                    return Err(Error::Distribution(format!(
                        "linspace bounds [{lo}, {hi}] must satisfy -1 <= lo <= hi <= 1"
                    )));
                }
            }
            InterceptSpec::Normal { sigma, clip } => {
                if !(sigma >= 0.0 && sigma.is_finite() && clip > 0.0 && inside(clip)) {
                    return Err(Error::Distribution(format!(
                        "normal needs sigma >= 0 and 0 < clip < 1, got sigma {sigma}, clip {clip}"
                    )));
                }
            }
            InterceptSpec::Uniform { lo, hi } => {
                if !(lo < hi && lo >= -1.0 && hi <= 1.0) {
                    return Err(Error::Distribution(format!(
                        "uniform bounds [{lo}, {hi}) must satisfy -1 <= lo < hi <= 1"
                    )));
                }
            }
        }
        Ok(())
    }

    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match *self {
            InterceptSpec::Linspace { lo, hi } => {
                let w = (hi - lo) / n as f64;
                (0..n).map(|i| lo + (i as f64 + 0.5) * w).collect()
            }
            InterceptSpec::Normal { sigma, clip } => {
                let d = Normal::new(0.0, sigma).expect("validated sigma");
                (0..n).map(|_| d.sample(rng).clamp(-clip, clip)).collect()
            }
            InterceptSpec::Uniform { lo, hi } => (0..n).map(|_| rng.random_range(lo..hi)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateRange {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleSpec {
    pub n_neurons: usize,
    pub radius: f64,
    pub intercepts: InterceptSpec,
    pub max_rates: RateRange,
    pub tau_rc: f64,
    pub tau_ref: f64,
    pub synapse_tau: f64,
    pub seed: u64,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec {
            n_neurons: 100,
            radius: 1.0,
            intercepts: InterceptSpec::Uniform { lo: -1.0, hi: 1.0 },
            max_rates: RateRange {
                lo: 200.0,
                hi: 400.0,
            },
            tau_rc: 0.02,
            tau_ref: 0.002,
            synapse_tau: 0.005,
            seed: 0,
        }
    }
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_neurons == 0 {
            return Err(invalid("n_neurons", "must be >= 1"));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(invalid(
                "radius",
                format!("must be > 0, got {}", self.radius),
            ));
        }
        if !(self.tau_rc > 0.0) {
            return Err(invalid("tau_rc", "must be > 0"));
        }
        if !(self.tau_ref >= 0.0) {
            return Err(invalid("tau_ref", "must be >= 0"));
        }
        if !(self.synapse_tau > 0.0) {
            return Err(invalid("synapse_tau", "must be > 0"));
        }
        let RateRange { lo, hi } = self.max_rates;
        if !(lo > 0.0 && lo <= hi) {
            return Err(Error::Distribution(format!(
                "max rate bounds [{lo}, {hi}] must satisfy 0 < lo <= hi"
            )));
        }
        if self.tau_ref > 0.0 && hi >= 1.0 / self.tau_ref {
            return Err(Error::Distribution(format!(
                "max rate {hi} Hz is unreachable with a {} s refractory period",
                self.tau_ref
            )));
        }
        self.intercepts.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeuronTuning {
    pub encoder: f64,
    pub gain: f64,
    pub bias: f64,
    pub intercept: f64,
    pub max_rate: f64,
}

impl NeuronTuning {
    /// Input current `α e x̂ + J_bias` at normalized value `x̂`, evaluated as
    /// `1 + α (e x̂ − intercept)` so the threshold lands exactly on the
    /// intercept (the steady-state rate is steep enough there that rounding
    /// in `J_bias` alone shows up as a few Hz).
    pub fn current(&self, x_hat: f64) -> f64 {
        1.0 + self.gain * (self.encoder * x_hat - self.intercept)
    }
}

/// Steady-state LIF rate for input current `j`.
pub fn lif_rate(j: f64, tau_rc: f64, tau_ref: f64) -> f64 {
    if j > 1.0 {
        1.0 / (tau_ref - tau_rc * (-1.0 / j).ln_1p())
    } else {
        0.0
    }
}

/// Rate of `tuning` at normalized value `x_hat`.
pub fn rate_curve(tuning: &NeuronTuning, tau_rc: f64, tau_ref: f64, x_hat: f64) -> f64 {
    lif_rate(tuning.current(x_hat), tau_rc, tau_ref)
}

/// Gain and bias putting the threshold at `intercept` and `max_rate` at the
/// radius edge.
pub fn gain_bias(intercept: f64, max_rate: f64, tau_rc: f64, tau_ref: f64) -> (f64, f64) {
    let j_max = 1.0 / (-((tau_ref - 1.0 / max_rate) / tau_rc).exp_m1());
    let gain = (j_max - 1.0) / (1.0 - intercept);
    (gain, 1.0 - gain * intercept)
}

/// Samples intercepts and max rates (in that order) from the seeded
/// generator; encoders alternate +1/−1.
pub fn build_ensemble(spec: &EnsembleSpec) -> Result<Vec<NeuronTuning>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n_neurons;
    let intercepts = spec.intercepts.sample(n, &mut rng);
    let RateRange { lo, hi } = spec.max_rates;
    let rates: Vec<f64> = (0..n)
        .map(|_| {
            if hi > lo {
                rng.random_range(lo..hi)
            } else {
                lo
            }
        })
        .collect();
    Ok(intercepts
        .into_iter()
        .zip(rates)
        .enumerate()
        .map(|(i, (intercept, max_rate))| {
            let (gain, bias) = gain_bias(intercept, max_rate, spec.tau_rc, spec.tau_ref);
            NeuronTuning {
                encoder: if i % 2 == 0 { 1.0 } else { -1.0 },
                gain,
                bias,
                intercept,
                max_rate,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoderSet {
    /// Normalized value per Hz for each neuron.
    pub weights: Vec<f64>,
    /// Reconstruction RMSE on the evaluation points, in value units.
    pub rmse: f64,
}

pub const DEFAULT_EVAL_POINTS: usize = 1000;

/// Evenly spaced points covering `[−1, 1]` in normalized units.
pub fn eval_points(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn rate_matrix(
    tunings: &[NeuronTuning],
    tau_rc: f64,
    tau_ref: f64,
    points: &[f64],
) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), tunings.len(), |p, i| {
        rate_curve(&tunings[i], tau_rc, tau_ref, points[p])
    })
}

/// Ridge regression `min ‖A d − x‖² + λ‖d‖²` for the identity with
/// `λ = (0.1 · mean max rate)² · n_points`.
pub fn solve_decoders(
    spec: &EnsembleSpec,
    tunings: &[NeuronTuning],
    n_points: usize,
) -> DecoderSet {
    let points = eval_points(n_points);
    let a = rate_matrix(tunings, spec.tau_rc, spec.tau_ref, &points);
    let target = DVector::from_column_slice(&points);
    let mean_rate = tunings.iter().map(|t| t.max_rate).sum::<f64>() / tunings.len() as f64;
    let lambda = (0.1 * mean_rate).powi(2) * n_points as f64;
    let n = tunings.len();
    let m = points.len();
    let d = if n <= m {
        let mut g = a.transpose() * &a;
        for i in 0..n {
            g[(i, i)] += lambda;
        }
        let rhs = a.transpose() * &target;
        g.cholesky()
            .expect("regularized Gram matrix is positive definite")
            .solve(&rhs)
    } else {
        let mut g = &a * a.transpose();
        for i in 0..m {
            g[(i, i)] += lambda;
        }
        let y = g
            .cholesky()
            .expect("regularized Gram matrix is positive definite")
            .solve(&target);
        a.transpose() * y
    };
    let err = &a * &d - &target;
    DecoderSet {
        rmse: spec.radius * (err.norm_squared() / m as f64).sqrt(),
        weights: d.iter().copied().collect(),
    }
}

/// Static decode `Σ d_i a_i(x̂)` in normalized units.
pub fn static_decode(
    spec: &EnsembleSpec,
    tunings: &[NeuronTuning],
    decoders: &DecoderSet,
    x_hat: f64,
) -> f64 {
    tunings
        .iter()
        .zip(&decoders.weights)
        .map(|(t, d)| d * rate_curve(t, spec.tau_rc, spec.tau_ref, x_hat))
        .sum()
}

/// First-order lowpass with unit DC gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lowpass {
    pub tau: f64,
    pub y: f64,
}

impl Lowpass {
    pub fn new(tau: f64) -> Self {
        Lowpass { tau, y: 0.0 }
    }

    pub fn step(&mut self, x: f64, dt: f64) -> f64 {
        self.y = lowpass_filter(x, self.y, self.tau, dt);
        self.y
    }
}

/// `y + (1 − e^{−dt/τ})(x − y)`, the exact response of `τ ẏ = x − y` to a
/// sample held over the step.
pub fn lowpass_filter(x: f64, y: f64, tau: f64, dt: f64) -> f64 {
    debug_assert!(tau > 0.0);
    y - (-dt / tau).exp_m1() * (x - y)
}

/// Spiking population with decoders, stepped by a single owner.
#[derive(Debug, Clone)]
pub struct Ensemble {
    spec: EnsembleSpec,
    tunings: Vec<NeuronTuning>,
    decoders: DecoderSet,
    voltage: Vec<f64>,
    refractory: Vec<f64>,
    filter: Lowpass,
}

impl Ensemble {
    pub fn new(spec: EnsembleSpec) -> Result<Self> {
        let tunings = build_ensemble(&spec)?;
        let decoders = solve_decoders(&spec, &tunings, DEFAULT_EVAL_POINTS);
        Ok(Self::from_parts(spec, tunings, decoders))
    }

    pub fn from_parts(
        spec: EnsembleSpec,
        tunings: Vec<NeuronTuning>,
        decoders: DecoderSet,
    ) -> Self {
        let n = tunings.len();
        Ensemble {
            filter: Lowpass::new(spec.synapse_tau),
            spec,
            tunings,
            decoders,
            voltage: vec![0.0; n],
            refractory: vec![0.0; n],
        }
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn tunings(&self) -> &[NeuronTuning] {
        &self.tunings
    }

    pub fn decoders(&self) -> &DecoderSet {
        &self.decoders
    }

    pub fn n_neurons(&self) -> usize {
        self.tunings.len()
    }

    pub fn reset(&mut self) {
        self.voltage.iter_mut().for_each(|v| *v = 0.0);
        self.refractory.iter_mut().for_each(|r| *r = 0.0);
        self.filter.y = 0.0;
    }

    /// Advances every neuron by `dt` with input `value` (value units) and
    /// returns the filtered decoded value in value units. Indices of neurons
    /// that spiked are appended to `spikes`.
    pub fn step(&mut self, value: f64, dt: f64, spikes: &mut Vec<usize>) -> f64 {
        debug_assert!(dt > 0.0);
        let x_hat = value / self.spec.radius;
        let tau_rc = self.spec.tau_rc;
        let mut decoded = 0.0;
        for i in 0..self.tunings.len() {
            let j = self.tunings[i].current(x_hat);
            let active = (dt - self.refractory[i]).clamp(0.0, dt);
            let mut v = self.voltage[i] - (j - self.voltage[i]) * (-active / tau_rc).exp_m1();
            self.refractory[i] -= dt;
            if v > 1.0 {
                // Interpolated crossing time from the start of the step; what
                // is left of the refractory period when the next step begins.
                let t_spike = dt + tau_rc * (-(v - 1.0) / (j - 1.0)).ln_1p();
                self.refractory[i] = self.spec.tau_ref + t_spike - dt;
                v = 0.0;
                decoded += self.decoders.weights[i] / dt;
                spikes.push(i);
            } else if v < 0.0 {
                v = 0.0;
            }
            self.voltage[i] = v;
        }
        self.spec.radius * self.filter.step(decoded, dt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subthreshold_and_ceiling() {
        assert_eq!(lif_rate(1.0, 0.02, 0.002), 0.0);
        assert_eq!(lif_rate(0.3, 0.02, 0.002), 0.0);
        assert!((lif_rate(1e12, 0.02, 0.002) - 500.0).abs() < 1e-3);
    }

    #[test]
    fn two_neuron_split() {
        let spec = EnsembleSpec {
            n_neurons: 2,
            intercepts: InterceptSpec::Linspace { lo: 0.0, hi: 0.0 },
            ..EnsembleSpec::default()
        };
        let t = build_ensemble(&spec).unwrap();
        assert_eq!(t[0].encoder, 1.0);
        assert_eq!(t[1].encoder, -1.0);
        for x in [0.1, 0.5, 1.0] {
            assert!(rate_curve(&t[0], 0.02, 0.002, x) > 0.0);
            assert_eq!(rate_curve(&t[0], 0.02, 0.002, -x), 0.0);
            assert!(rate_curve(&t[1], 0.02, 0.002, -x) > 0.0);
            assert_eq!(rate_curve(&t[1], 0.02, 0.002, x), 0.0);
        }
    }

    #[test]
    fn bad_distributions_are_rejected() {
        let bad = |intercepts| EnsembleSpec {
            intercepts,
            ..EnsembleSpec::default()
        };
        assert!(build_ensemble(&bad(InterceptSpec::Uniform { lo: 0.5, hi: 0.1 })).is_err());
        assert!(build_ensemble(&bad(InterceptSpec::Linspace { lo: -1.5, hi: 0.0 })).is_err());
        assert!(build_ensemble(&bad(InterceptSpec::Normal {
            sigma: 0.3,
            clip: 1.0
        }))
        .is_err());
        let rates = EnsembleSpec {
            max_rates: RateRange {
                lo: 400.0,
                hi: 600.0,
            },
            ..EnsembleSpec::default()
        };
        assert!(matches!(
            build_ensemble(&rates),
            Err(Error::Distribution(_))
        ));
    }

    #[test]
    fn linspace_uses_cell_midpoints() {
        let v = InterceptSpec::Linspace { lo: -1.0, hi: 1.0 }
            .sample(4, &mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(v, vec![-0.75, -0.25, 0.25, 0.75]);
    }

    #[test]
    fn lowpass_first_order_response() {
        let tau = 0.05;
        let dt = 1e-4;
        let mut f = Lowpass::new(tau);
        let steps = (tau / dt).round() as usize;
        for _ in 0..steps {
            f.step(2.0, dt);
        }
        assert!((f.y - 2.0 * (1.0 - (-1f64).exp())).abs() < 1e-9);
        let mut g = Lowpass { tau, y: 3.0 };
        for _ in 0..2 * steps {
            g.step(0.0, dt);
        }
        assert!((g.y - 3.0 * (-2f64).exp()).abs() < 1e-9);
    }
}
