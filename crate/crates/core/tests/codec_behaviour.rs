use sdneuro::codec::{encode, roundtrip, transient_skip, NeuronModel};
use sdneuro::filters::{lpf_pulse_peak, FilterParams};
use sdneuro::metrics::{firing_rate, isi_cv, mean_isi, sdr_default_band};
use sdneuro::neurons::SdNeuronParams;
use sdneuro::{Signal, SineSpec};

const RATE: f64 = 1e6;

fn vc_sinusoid(duration: f64) -> Signal {
    Signal::sine(&SineSpec::biased(50.0, 5.0), duration, RATE).unwrap()
}

fn sd() -> NeuronModel {
    NeuronModel::SigmaDelta(SdNeuronParams::default())
}

fn f_default() -> FilterParams {
    FilterParams::new(1.0, 0.01).unwrap()
}

#[test]
fn pico_dc_has_regular_intervals() {
    let x = Signal::dc(0.05, 1.0, RATE).unwrap();
    let train = encode(&x, &NeuronModel::SigmaDelta(SdNeuronParams::pico()), false).unwrap().train;
    assert!(train.len() > 20, "{} spikes", train.len());
    let cv = isi_cv(&train, 0.1).unwrap();
    assert!(cv <= 0.01, "cv {cv}");
}

#[test]
fn pico_rate_agrees_with_mean_interval() {
    let x = Signal::dc(0.05, 1.0, RATE).unwrap();
    let train = encode(&x, &NeuronModel::SigmaDelta(SdNeuronParams::pico()), false).unwrap().train;
    let rate = firing_rate(&train, (0.1, 1.0)).unwrap();
    let isi = mean_isi(&train, 0.1).unwrap();
    assert!((rate * isi - 1.0).abs() <= 0.01, "rate {rate} isi {isi}");
}

#[test]
fn spike_density_follows_the_input() {
    let x = vc_sinusoid(2.05);
    let train = encode(&x, &sd(), false).unwrap().train;
    let bins = 2000;
    let width = 1e-3;
    let mut hist = vec![0.0; bins];
    for &t in train.times() {
        if t >= 0.05 {
            let b = ((t - 0.05) / width) as usize;
            if b < bins {
                hist[b] += 1.0;
            }
        }
    }
    let mean = hist.iter().sum::<f64>() / bins as f64;
    let phase: Vec<f64> = (0..bins)
        .map(|b| (2.0 * std::f64::consts::PI * 5.0 * (0.05 + (b as f64 + 0.5) * width)).sin())
        .collect();
    let corr = |lag: i64| -> f64 {
        (0..bins)
            .map(|b| {
                let j = (b as i64 + lag).rem_euclid(bins as i64) as usize;
                (hist[j] - mean) * phase[b]
            })
            .sum()
    };
    let (best, peak) = (-100i64..=100)
        .map(|lag| (lag, corr(lag)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!(peak > 0.0);
    // Within one loop time constant (feedback plus error filter).
    let loop_delay_ms = 12;
    assert!(best.abs() <= loop_delay_ms, "lag {best} ms");
}

#[test]
fn encode_is_deterministic() {
    let x = vc_sinusoid(0.3);
    let a = encode(&x, &sd(), false).unwrap().train;
    let b = encode(&x, &sd(), false).unwrap().train;
    assert_eq!(a.times(), b.times());
}

fn dc_ripple(f: &FilterParams) -> f64 {
    let x = Signal::dc(50.0, 0.5, RATE).unwrap();
    let r = roundtrip(&x, &sd(), f).unwrap();
    let tail = r.reconstruction.tail_from(0.25);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

#[test]
fn dc_ripple_within_single_pulse_bound() {
    let f = f_default();
    let p = SdNeuronParams::default();
    let bound = lpf_pulse_peak(&f, p.pulse_width, p.pulse_amplitude).unwrap();
    let ripple = dc_ripple(&f);
    assert!(ripple > 0.0 && ripple <= bound, "ripple {ripple} bound {bound}");
}

#[test]
fn sinusoid_residual_far_below_fundamental() {
    let f = f_default();
    let skip = transient_skip(&sd(), &f);
    let x = vc_sinusoid(2.0 + skip);
    let r = roundtrip(&x, &sd(), &f).unwrap();
    let report = sdr_default_band(&r.reconstruction, 5.0, skip).unwrap();
    let tail = r.residual.tail_from(skip);
    let residual_power = tail.iter().map(|v| v * v).sum::<f64>() / tail.len() as f64;
    let fundamental_power = report.fitted_gain.powi(2) / 2.0;
    let db = 10.0 * (fundamental_power / residual_power).log10();
    assert!(db >= 30.0, "{db} dB");
}

#[test]
fn longer_reconstruction_filter_trades_ripple_for_attenuation() {
    let taus = [0.005, 0.01, 0.02];
    let ripples: Vec<f64> = taus.iter().map(|&t| dc_ripple(&FilterParams::new(1.0, t).unwrap())).collect();
    let gains: Vec<f64> = taus
        .iter()
        .map(|&t| {
            let f = FilterParams::new(1.0, t).unwrap();
            let skip = transient_skip(&sd(), &f);
            let x = vc_sinusoid(2.0 + skip);
            let r = roundtrip(&x, &sd(), &f).unwrap();
            sdr_default_band(&r.reconstruction, 5.0, skip).unwrap().fitted_gain
        })
        .collect();
    assert!(ripples[0] > ripples[1] && ripples[1] > ripples[2], "{ripples:?}");
    assert!(gains[0] > gains[1] && gains[1] > gains[2], "{gains:?}");
}

#[test]
fn zero_input_roundtrip_is_silent() {
    let x = Signal::dc(0.0, 0.2, RATE).unwrap();
    let r = roundtrip(&x, &sd(), &f_default()).unwrap();
    assert!(r.train.is_empty());
    assert!(r.reconstruction.samples().iter().all(|&v| v == 0.0));
    assert!(r.residual.samples().iter().all(|&v| v == 0.0));
}
