use neurocart::control::*;
use neurocart::dynamics::{linearize, StateVec, SystemParams};
use neurocart::lqr::{lqr_gain, LqrWeights};
use neurocart::metrics::*;
use neurocart::nef::{rate_curve, Ensemble, EnsembleSpec};

fn trace_of(
    dt: f64,
    theta: impl Fn(f64) -> f64,
    u: impl Fn(f64) -> f64,
    duration: f64,
) -> SimTrace {
    let n = (duration / dt).round() as usize;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    SimTrace {
        dt,
        states: times
            .iter()
            .map(|t| StateVec::from_angles(&[theta(*t)]))
            .collect(),
        controls: times.iter().map(|t| u(*t)).collect(),
        times,
        raster: Vec::new(),
        n_neurons: 0,
        synops: 0,
        neuron_updates: 0,
        inferences: 0,
        radius: None,
        outcome: SimOutcome::Completed,
        seed: 0,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn first_order_response_closed_forms() {
    let tau = 0.5;
    let t = trace_of(1e-3, |t| 1.0 - (-t / tau).exp(), |_| 0.0, 30.0 * tau);
    let m = control_metrics(&t, 1, 0.05).unwrap();
    assert!(
        rel(m.rise_time.unwrap(), tau * 9f64.ln()) < 0.01,
        "{:?}",
        m.rise_time
    );
    assert!(
        rel(m.settling_time.unwrap(), tau * 20f64.ln()) < 0.01,
        "{:?}",
        m.settling_time
    );
    assert!(m.peak_overshoot.unwrap() < 1e-9);
    assert!(m.settling_time.unwrap() >= m.rise_time.unwrap());
}

#[test]
fn decaying_error_integrals() {
    let t = trace_of(1e-3, |t| (-t).exp(), |_| 2.0, 40.0);
    let m = control_metrics(&t, 1, 0.05).unwrap();
    assert!(rel(m.iae, 1.0) < 1e-4);
    assert!(rel(m.itae, 1.0) < 1e-4);
    assert!(rel(m.isc, 160.0) < 1e-12);
    assert!(m.steady_state_error < 1e-12);
}

#[test]
fn negative_deviation_is_mirror_image() {
    let a = control_metrics(
        &trace_of(1e-3, |t| 0.2 * (-t).exp() * (3.0 * t).cos(), |_| 0.0, 15.0),
        1,
        0.05,
    )
    .unwrap();
    let b = control_metrics(
        &trace_of(1e-3, |t| -0.2 * (-t).exp() * (3.0 * t).cos(), |_| 0.0, 15.0),
        1,
        0.05,
    )
    .unwrap();
    assert_eq!(a.rise_time, b.rise_time);
    assert_eq!(a.settling_time, b.settling_time);
    assert!((a.peak_overshoot.unwrap() - b.peak_overshoot.unwrap()).abs() < 1e-9);
    // e^{−t} cos 3t bottoms out where tan 3t = −1/3
    let t_min = (std::f64::consts::PI - (1.0f64 / 3.0).atan()) / 3.0;
    let expect = -100.0 * (-t_min).exp() * (3.0 * t_min).cos();
    assert!((a.peak_overshoot.unwrap() - expect).abs() < 0.01 * expect);
}

#[test]
fn integrals_survive_supersampling() {
    let y = |t: f64| 0.2 * (-0.7 * t).exp() * (2.0 * t).cos();
    let u = |t: f64| 30.0 * (-t).exp() * (5.0 * t).sin();
    let a = control_metrics(&trace_of(1e-3, y, u, 10.0), 1, 0.05).unwrap();
    let b = control_metrics(&trace_of(5e-4, y, u, 10.0), 1, 0.05).unwrap();
    for (p, q) in [(a.iae, b.iae), (a.itae, b.itae), (a.isc, b.isc)] {
        assert!(rel(p, q) <= 1e-3, "{p} vs {q}");
    }
}

#[test]
fn metrics_are_pure() {
    let p = SystemParams::cartpole();
    let k = lqr_gain(&linearize(&p), &LqrWeights::cartpole_ensemble()).unwrap();
    let c = ControllerConfig::SpikingLqrEnsemble {
        gain: k,
        ensemble: EnsembleSpec {
            n_neurons: 20,
            ..Default::default()
        },
        radius: RadiusRule::default(),
    };
    let t = closed_loop_sim(
        &p,
        &c,
        &StateVec::from_angles(&[0.2]),
        &SimSettings::default(),
        1,
    )
    .unwrap();
    let a = control_metrics(&t, 1, 0.05).unwrap();
    let b = control_metrics(&t.clone(), 1, 0.05).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

#[test]
fn unsettled_and_fallen_traces() {
    let grow = trace_of(1e-3, |t| 0.1 + 0.1 * t, |_| 0.0, 2.0);
    let m = control_metrics(&grow, 1, 0.05).unwrap();
    assert!(m.settling_time.is_none());
    let mut fallen = trace_of(1e-3, |t| 0.2 * (-t).exp(), |_| 0.0, 5.0);
    fallen.outcome = SimOutcome::PoleFell { time: 5.0, link: 0 };
    let m = control_metrics(&fallen, 1, 0.05).unwrap();
    assert!(m.pole_fell && m.settling_time.is_none());
    assert!(control_metrics(&fallen, 9, 0.05).is_err());
}

#[test]
fn spike_counting() {
    let mut t = trace_of(1e-3, |_| 0.0, |_| 0.0, 10.0);
    t.n_neurons = 1;
    assert_eq!(spikes_per_neuron(&t), 0.0);
    t.raster = t.times[1..]
        .iter()
        .map(|&tt| Spike { t: tt, neuron: 0 })
        .collect();
    assert_eq!(spikes_per_neuron(&t), 10_000.0);
}

#[test]
fn cartpole_spike_counts_respect_rate_curves() {
    let p = SystemParams::cartpole();
    let k = lqr_gain(&linearize(&p), &LqrWeights::cartpole_ensemble()).unwrap();
    let spec = EnsembleSpec::default();
    let c = ControllerConfig::SpikingLqrEnsemble {
        gain: k.clone(),
        ensemble: spec.clone(),
        radius: RadiusRule::default(),
    };
    let trace = closed_loop_sim(
        &p,
        &c,
        &StateVec::from_angles(&[0.2]),
        &SimSettings::default(),
        0,
    )
    .unwrap();
    let radius = trace.radius.unwrap();
    let ens = Ensemble::new(EnsembleSpec {
        radius,
        seed: 0,
        ..spec.clone()
    })
    .unwrap();
    // each neuron fires no faster than its rate at the extreme represented
    // value on its preferred side
    let extreme = trace
        .states
        .iter()
        .map(|s| k.dot(s).abs())
        .fold(0.0, f64::max)
        / radius;
    let bound: f64 = ens
        .tunings()
        .iter()
        .map(|tn| rate_curve(tn, spec.tau_rc, spec.tau_ref, extreme * tn.encoder) * 10.0 + 1.0)
        .sum::<f64>()
        / 100.0;
    let spn = spikes_per_neuron(&trace);
    assert!(spn > 0.0 && spn <= bound, "{spn} vs bound {bound}");
    assert!(spn <= 400.0 * 10.0);
}

#[test]
fn loihi_energy_grows_with_neuron_count() {
    let p = SystemParams::cartpole();
    let k = lqr_gain(&linearize(&p), &LqrWeights::cartpole_ensemble()).unwrap();
    let hw = HardwareConstants::default();
    let s = SimSettings {
        duration: 1.0,
        ..Default::default()
    };
    let mut last = 0.0;
    for n in [2usize, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048] {
        let c = ControllerConfig::SpikingLqrEnsemble {
            gain: k.clone(),
            ensemble: EnsembleSpec {
                n_neurons: n,
                ..Default::default()
            },
            radius: RadiusRule::Fixed { radius: 80.0 },
        };
        let t = closed_loop_sim(&p, &c, &StateVec::from_angles(&[0.2]), &s, 0).unwrap();
        let e = neuromorphic_metrics(&t, &hw, None).energy_loihi;
        assert!(e > last, "n={n}: {e} after {last}");
        last = e;
    }
}
