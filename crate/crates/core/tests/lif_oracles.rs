use neurocart::dynamics::{linearize, StateVec, SystemParams};
use neurocart::lif::*;
use neurocart::lqr::{lqr_gain, GainVector, LqrWeights};
use proptest::prelude::*;

fn multiplier_neuron() -> LifParams {
    LifParams {
        tau_syn: 0.05,
        ..LifParams::default()
    }
}

fn first_spikes(p: &LifParams, current: f64, dt: f64, horizon: f64) -> Vec<f64> {
    let mut s = LifState::rest(p);
    let mut out = Vec::new();
    let steps = (horizon / dt).round() as usize;
    for k in 1..=steps {
        let (n, spiked) = lif_step(p, &s, current, dt);
        s = n;
        if spiked {
            out.push(k as f64 * dt);
        }
    }
    out
}

#[test]
fn constant_current_frequency_law() {
    let p = LifParams::default();
    for &i in &[2.0, 10.0, 37.0] {
        let spikes = first_spikes(&p, i, 1e-5, 2.0);
        let train = SpikeTrain::new(0, spikes, 2.0).unwrap();
        let f = isi_frequency(&train);
        let expect = i / (p.v_th * p.c_mem);
        assert!((f - expect).abs() / expect < 0.01, "I={i}: {f} vs {expect}");
    }
}

#[test]
fn halving_dt_moves_spikes_by_at_most_dt() {
    let p = LifParams::default();
    let dt = 3e-4;
    let coarse = first_spikes(&p, 10.0, dt, 1.0);
    let fine = first_spikes(&p, 10.0, dt / 2.0, 1.0);
    assert!((coarse[0] - fine[0]).abs() <= dt + 1e-12);
    for (a, b) in coarse.windows(2).zip(fine.windows(2)) {
        assert!(((a[1] - a[0]) - (b[1] - b[0])).abs() <= dt + 1e-12);
    }
}

#[test]
fn refractory_hold_caps_rate() {
    let p = LifParams {
        refractory: 0.01,
        ..LifParams::default()
    };
    let spikes = first_spikes(&p, 1e4, 1e-5, 1.0);
    let f = spikes.len() as f64;
    assert!(f <= 100.0 && f > 90.0, "{f}");
}

fn steady_weighted_sum(freqs: &[f64], weights: &[f64]) -> f64 {
    let horizon = 5.0;
    let dt = 1e-4;
    let inputs: Vec<SpikeTrain> = freqs
        .iter()
        .map(|f| rate_encode(*f, 1.0, horizon, dt))
        .collect();
    let out = weighted_sum_neuron(&multiplier_neuron(), &inputs, weights, horizon, dt).unwrap();
    // Skip the synaptic charge-up before measuring.
    let settled: Vec<f64> = out.spike_times.into_iter().filter(|t| *t > 0.5).collect();
    isi_frequency(&SpikeTrain::new(0, settled, horizon).unwrap())
}

#[test]
fn multiplier_rows() {
    for (w, expect) in [(1.42, 14.2), (0.71, 7.1)] {
        let f = steady_weighted_sum(&[10.0], &[w]);
        assert!((f - expect).abs() / expect <= 0.04, "w={w}: {f}");
    }
}

#[test]
fn three_inputs_add() {
    let f = steady_weighted_sum(&[10.0, 10.0, 10.0], &[1.0, 1.0, 1.0]);
    assert!((f - 30.0).abs() / 30.0 <= 0.04, "{f}");
}

#[test]
fn doubling_inputs_doubles_output() {
    for w in [0.71, 1.42] {
        let f1 = steady_weighted_sum(&[10.0], &[w]);
        let f2 = steady_weighted_sum(&[20.0], &[w]);
        assert!((f2 / f1 - 2.0).abs() / 2.0 <= 0.04, "w={w}: {f1} -> {f2}");
    }
}

#[test]
fn half_second_count_recovers_weighted_sum() {
    let horizon = 1.0;
    let dt = 1e-4;
    // A count over 0.5 s is quantized to 2 Hz, so the output rate must be
    // well above 50 Hz for a 4% bound to be meaningful.
    let input = rate_encode(50.0, 1.0, horizon, dt);
    let out = weighted_sum_neuron(&multiplier_neuron(), &[input], &[1.42], horizon, dt).unwrap();
    let f = count_decode(&out, 0.5);
    assert!((f - 71.0).abs() / 71.0 <= 0.04, "{f}");
}

#[test]
fn lui_board_matches_unbounded_neuron() {
    let horizon = 2.0;
    let dt = 1e-4;
    let inputs: Vec<SpikeTrain> = [10.0, 5.0]
        .iter()
        .map(|f| rate_encode(*f, 1.0, horizon, dt))
        .collect();
    let board = LuiBoard::new(multiplier_neuron(), vec![1.0, 0.5]).unwrap();
    let a = board.run(&inputs, horizon, dt).unwrap();
    let b = weighted_sum_neuron(&multiplier_neuron(), &inputs, &[1.0, 0.5], horizon, dt).unwrap();
    assert_eq!(a, b);
}

fn two_neuron_gain() -> GainVector {
    lqr_gain(
        &linearize(&SystemParams::cartpole()),
        &LqrWeights::two_neuron_cartpole(),
    )
    .unwrap()
}

#[test]
fn two_neuron_zero_state_is_silent() {
    let out = two_neuron_control(
        &LifParams::two_neuron(),
        &StateVec::zeros(1),
        &two_neuron_gain(),
        &RateCodedConfig::default(),
    );
    assert_eq!(out.u, 0.0);
    assert!(out.spikes[0].is_empty() && out.spikes[1].is_empty());
}

#[test]
fn two_neuron_matches_state_feedback() {
    let k = two_neuron_gain();
    let s = StateVec::from_angles(&[0.2]);
    let exact = k.control(&s);
    let out = two_neuron_control(
        &LifParams::two_neuron(),
        &s,
        &k,
        &RateCodedConfig::default(),
    );
    assert!(
        (out.u - exact).abs() / exact.abs() <= 0.05,
        "{} vs {exact}",
        out.u
    );

    // K·X > 0 here is all positive pathway.
    let s = StateVec::from_angles(&[-0.2]);
    assert!(k.dot(&s) > 0.0);
    let out = two_neuron_control(
        &LifParams::two_neuron(),
        &s,
        &k,
        &RateCodedConfig::default(),
    );
    assert!(out.u < 0.0);
    assert!(out.f_neg == 0.0 && out.spikes[1].is_empty() && out.f_pos > 0.0);
}

#[test]
fn three_dendrites_ignore_cart_position() {
    let k = two_neuron_gain();
    let cfg = RateCodedConfig {
        dendrites: Dendrites::NoCartPosition,
        ..RateCodedConfig::default()
    };
    let p = LifParams::two_neuron();
    let a = two_neuron_control(&p, &StateVec::from_vec(vec![0.0, 0.1, 0.0, 0.0]), &k, &cfg);
    let b = two_neuron_control(&p, &StateVec::from_vec(vec![0.3, 0.1, 0.0, 0.0]), &k, &cfg);
    assert_eq!(a, b);
}

#[test]
fn single_board_tracks_three_dendrite_feedback() {
    let k = two_neuron_gain();
    let cfg = RateCodedConfig {
        dendrites: Dendrites::NoCartPosition,
        ..RateCodedConfig::default()
    };
    let s = StateVec::from_vec(vec![0.0, 0.15, 0.05, -0.1]);
    let exact = -(k.0[1] * 0.15 + k.0[2] * 0.05 + k.0[3] * -0.1);
    let out = lui_control(&LifParams::two_neuron(), &s, &k, &cfg).unwrap();
    assert!(
        (out.u - exact).abs() / exact.abs() <= 0.05,
        "{} vs {exact}",
        out.u
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn two_neuron_control_is_odd(
        x in -0.5f64..0.5, th in -0.3f64..0.3, xd in -1.0f64..1.0, thd in -1.0f64..1.0,
    ) {
        let k = two_neuron_gain();
        let cfg = RateCodedConfig { window: 0.05, ..RateCodedConfig::default() };
        let p = LifParams::two_neuron();
        let s = StateVec::from_vec(vec![x, th, xd, thd]);
        let m = StateVec::from_vec(vec![-x, -th, -xd, -thd]);
        let a = two_neuron_control(&p, &s, &k, &cfg).u;
        let b = two_neuron_control(&p, &m, &k, &cfg).u;
        prop_assert_eq!(a, -b);
    }
}
