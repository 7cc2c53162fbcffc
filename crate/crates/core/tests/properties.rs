use proptest::prelude::*;
use sdneuro::codec::{decode, SpikeTrain};
use sdneuro::esn::{esn_init, esn_step, EsnInit, EsnParams, EsnState};
use sdneuro::filters::{lpf_step, FilterParams, FilterState};
use sdneuro::metrics::{energy_model, energy_per_spike, firing_rate, sdr, EnergyProxy};
use sdneuro::{Signal, SineSpec};

fn sine(amp: f64, freq: f64, offset: f64, phase: f64, duration: f64, rate: f64) -> Signal {
    let spec = SineSpec { amplitude: amp, freq, offset, phase };
    Signal::sine(&spec, duration, rate).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sine_stays_within_its_envelope(
        amp in 0.0f64..100.0,
        extra in 0.0f64..50.0,
        freq in 1.0f64..200.0,
        phase in -3.2f64..3.2,
    ) {
        let offset = amp + extra;
        let x = sine(amp, freq, offset, phase, 0.05, 10_000.0);
        for &v in x.samples() {
            prop_assert!(v >= offset - amp && v <= offset + amp);
        }
    }

    #[test]
    fn sine_rms_matches_amplitude(
        amp in 0.1f64..100.0,
        freq in 5.0f64..100.0,
        phase in -3.2f64..3.2,
        cycles in 5u32..12,
    ) {
        let offset = amp;
        let x = sine(amp, freq, offset, phase, f64::from(cycles) / freq, 100_000.0);
        let rms = (x.samples().iter().map(|v| (v - offset).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
        let expected = amp / 2f64.sqrt();
        prop_assert!((rms - expected).abs() <= 0.005 * expected, "{rms} vs {expected}");
    }

    #[test]
    fn lpf_converges_monotonically(gain in 0.1f64..10.0, tau in 1e-4f64..1e-1, x in -100.0f64..100.0) {
        let p = FilterParams::new(gain, tau).unwrap();
        let target = gain * x;
        let mut st = FilterState::default();
        let mut last = (st.y - target).abs();
        for _ in 0..200 {
            st = lpf_step(st, x, 1e-5, &p);
            let err = (st.y - target).abs();
            prop_assert!(err <= last);
            last = err;
        }
    }

    #[test]
    fn sdr_ignores_gain_and_offset(a in 0.1f64..10.0, b in -100.0f64..100.0, h in 0.001f64..0.1) {
        let rate = 10_000.0;
        let f = 20.0;
        let samples: Vec<f64> = (0..5000)
            .map(|k| {
                let t = k as f64 / rate;
                let w = 2.0 * std::f64::consts::PI * f * t;
                w.sin() + h * (2.0 * w).sin() + 0.5 * h * (3.0 * w + 0.3).cos()
            })
            .collect();
        let x = Signal::new(samples.clone(), rate).unwrap();
        let y = Signal::new(samples.iter().map(|v| a * v + b).collect(), rate).unwrap();
        let r0 = sdr(&x, f, 500.0, 0.0).unwrap().sdr_db;
        let r1 = sdr(&y, f, 500.0, 0.0).unwrap().sdr_db;
        prop_assert!((r0 - r1).abs() <= 0.01, "{r0} vs {r1}");
    }

    #[test]
    fn firing_rate_adds_over_disjoint_windows(
        gaps in prop::collection::vec(1e-4f64..0.05, 1..200),
        split in 0.05f64..0.95,
    ) {
        let mut t = 0.0;
        let mut times = Vec::new();
        for g in gaps {
            t += g;
            times.push(t);
        }
        let duration = t + 0.01;
        let train = SpikeTrain::new(times, 1e-4, 100.0, duration).unwrap();
        let cut = split * duration;
        let whole = firing_rate(&train, (0.0, duration)).unwrap() * duration;
        let left = firing_rate(&train, (0.0, cut)).unwrap() * cut;
        let right = firing_rate(&train, (cut, duration)).unwrap() * (duration - cut);
        prop_assert!((whole - left - right).abs() <= 1e-9 * whole.max(1.0));
    }

    #[test]
    fn decode_is_linear_over_disjoint_trains(
        slots in prop::collection::btree_set(0usize..400, 2..40),
        tau in 1e-3f64..2e-2,
    ) {
        let f = FilterParams::new(1.0, tau).unwrap();
        let rate = 100_000.0;
        let pw = 1e-4;
        let times: Vec<f64> = slots.iter().map(|&k| k as f64 * 2.5e-4).collect();
        let (a, b): (Vec<(usize, f64)>, Vec<(usize, f64)>) =
            times.iter().copied().enumerate().partition(|(i, _)| i % 2 == 0);
        let duration = 0.11;
        let mk = |v: Vec<f64>| SpikeTrain::new(v, pw, 100.0, duration).unwrap();
        let union = decode(&mk(times.clone()), &f, rate).unwrap();
        let da = decode(&mk(a.into_iter().map(|p| p.1).collect()), &f, rate).unwrap();
        let db = decode(&mk(b.into_iter().map(|p| p.1).collect()), &f, rate).unwrap();
        for ((u, x), y) in union.samples().iter().zip(da.samples()).zip(db.samples()) {
            prop_assert!((u - x - y).abs() <= 1e-9 * u.abs().max(1.0));
        }
    }

    #[test]
    fn energy_roundtrips_spike_cost(
        count in 1usize..500,
        duration in 0.5f64..20.0,
        spike_j in 1e-13f64..1e-9,
    ) {
        let times: Vec<f64> = (0..count).map(|k| (k as f64 + 0.5) * duration / count as f64).collect();
        let train = SpikeTrain::new(times, 1e-4, 100.0, duration).unwrap();
        let total = energy_model(&train, 0.0, spike_j, duration).unwrap();
        let rate = firing_rate(&train, (0.0, duration)).unwrap();
        let per = energy_per_spike(total.total_energy, rate, duration).unwrap();
        prop_assert!((per - spike_j).abs() <= 1e-9 * spike_j);
    }

    #[test]
    fn static_proxy_dominates_for_any_duration(count in 0usize..300, duration in 1e-3f64..100.0) {
        let times: Vec<f64> = (0..count).map(|k| (k as f64 + 0.5) * duration / count.max(1) as f64).collect();
        let train = SpikeTrain::new(times, 1e-4, 100.0, duration).unwrap();
        let adex = EnergyProxy::ADEX.report(&train, duration).unwrap().total_energy;
        let sd = EnergyProxy::SIGMA_DELTA.report(&train, duration).unwrap().total_energy;
        prop_assert!(adex > sd);
    }

    #[test]
    fn vectorised_update_matches_scalar_nodes(seed in 0u64..1000, steps in 1usize..20) {
        let p = esn_init(&EsnInit { nodes: 12, inputs: 3, seed, density: 0.4, ..EsnInit::default() }).unwrap();
        let mut state = EsnState::zeros(12);
        for k in 0..steps {
            let x = nalgebra::DVector::from_vec(vec![(k as f64).sin(), 0.3, 1.0]);
            let next = esn_step(&state, &x, &p);
            for i in 0..12 {
                let mut z = p.bias[i];
                for j in 0..3 {
                    z += x[j] * p.w_in[(i, j)];
                }
                for j in 0..12 {
                    z += state.s[j] * p.w[(j, i)];
                }
                let expected = (1.0 - p.alpha) * state.s[i] + p.alpha * z.tanh();
                prop_assert!((next.s[i] - expected).abs() <= 1e-12);
            }
            for v in next.s.iter() {
                prop_assert!(v.abs() <= 1.0);
            }
            state = next;
        }
    }

    #[test]
    fn network_text_roundtrip(seed in 0u64..1000, nodes in 1usize..12, inputs in 1usize..4) {
        let mut p = esn_init(&EsnInit { nodes, inputs, seed, density: 1.0, ..EsnInit::default() }).unwrap();
        p.w_out = Some(nalgebra::DVector::from_fn(nodes, |i, _| i as f64 * 0.1 - 0.3));
        let mut buf = Vec::new();
        p.write_text(&mut buf).unwrap();
        let q = EsnParams::read_text(buf.as_slice()).unwrap();
        prop_assert_eq!(p, q);
    }
}
