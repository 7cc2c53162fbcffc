//! Acceptance suite: one line per criterion, then a single verdict.
//!
//! Tolerances and runtime limits are pinned as constants below.

use std::time::{Duration, Instant};

use nalgebra::DVector;
use sdneuro::codec::encode;
use sdneuro::esn::{esn_init, esn_step, EsnInit, EsnParams, EsnState};
use sdneuro::filters::{filter_samples, lpf_pulse_peak, lpf_step, FilterParams, FilterState};
use sdneuro::metrics::{energy_per_spike, EnergyProxy};
use sdneuro::neurons::{AdexParams, SdNeuronParams};
use sdneuro::{NeuronModel, Signal, SpikeTrain};
use sdneuro_cli::config::{Config, ModelKind};
use sdneuro_cli::experiments::{sine_point, slew_row, slew_variants};
use sdneuro_cli::{run, Experiment};

const DC_R2_MIN: f64 = 0.999;
const DC_INTERCEPT_MAX_FRAC: f64 = 0.02;
const SLEW_RATIO_MIN: f64 = 1.5;
const SLEW_SDR_MATCH_DB: f64 = 3.0;
const SDR_5HZ_MIN_DB: f64 = 30.0;
const SDR_MONOTONE_SLACK_DB: f64 = 1.0;
const SDR_SWEEP_HZ: [f64; 4] = [5.0, 20.0, 50.0, 100.0];
const FILTER_REL_TOL: f64 = 1e-9;
const ADEX_SPIKE_TOL_FRAC_ISI: f64 = 0.02;
const ESN_SCALAR_TOL: f64 = 1e-9;
const ESN_NRMSE_MAX: f64 = 0.1;
const ESN_PASSTHROUGH_TOL: f64 = 1e-9;
const ENERGY_REL_TOL: f64 = 4.0 * f64::EPSILON;

struct Outcome {
    id: &'static str,
    name: &'static str,
    passed: bool,
    detail: String,
    elapsed: Duration,
    limit: Option<Duration>,
}

fn check(
    id: &'static str,
    name: &'static str,
    limit: Option<Duration>,
    body: impl FnOnce() -> (bool, String),
) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = body();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    Outcome {
        id,
        name,
        passed: ok && in_time,
        detail,
        elapsed,
        limit,
    }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn parse_csv(bytes: &[u8]) -> Vec<Vec<f64>> {
    std::str::from_utf8(bytes)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn dc_linearity() -> (bool, String) {
    let cfg = Config::default();
    let out = run(Experiment::DcSweep, &cfg, None).unwrap();
    let rows = parse_csv(&out.artifact("dc_sweep.csv").unwrap().bytes);
    let x: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let y: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let fit = sdneuro::metrics::fit_gain_offset(&x, &y);
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_res: f64 = x.iter().zip(&y).map(|(a, b)| (b - fit.gain * a - fit.offset).powi(2)).sum();
    let ss_tot: f64 = y.iter().map(|b| (b - mean).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    let max = y.iter().copied().fold(0.0, f64::max);
    let frac = fit.offset.abs() / max;
    (
        rows.len() == 10 && r2 >= DC_R2_MIN && frac <= DC_INTERCEPT_MAX_FRAC,
        format!(
            "{} points {}-{} nA, R² = {r2:.6} (≥ {DC_R2_MIN}), |intercept| = {:.2}% of max rate (≤ {}%)",
            rows.len(),
            x[0],
            x[x.len() - 1],
            100.0 * frac,
            100.0 * DC_INTERCEPT_MAX_FRAC
        ),
    )
}

fn zero_input() -> (bool, String) {
    let x = Signal::dc(0.0, 1.0, 1e6).unwrap();
    let n = encode(&x, &NeuronModel::SigmaDelta(SdNeuronParams::default()), false)
        .unwrap()
        .train
        .len();
    (n == 0, format!("{n} spikes in 1 s at zero input"))
}

fn slewing() -> (bool, String) {
    let cfg = Config::default();
    let variants = slew_variants(&cfg);
    let ext = slew_row(&cfg, &variants[0].1).unwrap();
    let narrow = slew_row(&cfg, &variants[1].1).unwrap();
    let ratio = narrow.spikes as f64 / ext.spikes as f64;
    let gap = (narrow.sdr_db - ext.sdr_db).abs();
    (
        ratio >= SLEW_RATIO_MIN && gap <= SLEW_SDR_MATCH_DB,
        format!(
            "narrow {} vs extended {} spikes, ratio {ratio:.3} (≥ {SLEW_RATIO_MIN}); SDR {:.2} vs {:.2} dB, gap {gap:.2} (≤ {SLEW_SDR_MATCH_DB})",
            narrow.spikes, ext.spikes, narrow.sdr_db, ext.sdr_db
        ),
    )
}

fn slewing_invariant() -> (bool, String) {
    let cfg = Config::default();
    let variants = slew_variants(&cfg);
    let ext = slew_row(&cfg, &variants[0].1).unwrap();
    let narrow = slew_row(&cfg, &variants[1].1).unwrap();
    (
        narrow.spikes > ext.spikes,
        format!("narrow {} > extended {} required", narrow.spikes, ext.spikes),
    )
}

fn encoding_quality() -> (bool, String) {
    let cfg = Config::default();
    let sdrs: Vec<f64> = SDR_SWEEP_HZ
        .iter()
        .map(|&f| sine_point(&cfg, ModelKind::Sd, f, 1.0).unwrap().0.sdr_db)
        .collect();
    let monotone = sdrs.windows(2).all(|w| w[1] <= w[0] + SDR_MONOTONE_SLACK_DB);
    let listed: Vec<String> = SDR_SWEEP_HZ.iter().zip(&sdrs).map(|(f, s)| format!("{f} Hz {s:.2} dB")).collect();
    (
        sdrs[0] >= SDR_5HZ_MIN_DB && monotone,
        format!(
            "{} (5 Hz ≥ {SDR_5HZ_MIN_DB} dB, non-increasing within {SDR_MONOTONE_SLACK_DB} dB)",
            listed.join(", ")
        ),
    )
}

fn filter_exactness() -> (bool, String) {
    let p = FilterParams::new(1.0, 0.01).unwrap();
    let dt = 1e-6;
    let mut st = FilterState::default();
    let mut worst = 0.0f64;
    for k in 1..=50_000 {
        st = lpf_step(st, 1.0, dt, &p);
        let t = k as f64 * dt;
        let exact = -(-t / p.tau).exp_m1();
        worst = worst.max((st.y - exact).abs() / exact);
    }
    let (width, amp) = (1e-4, 100.0);
    let n = (width / dt).round() as usize;
    let mut pulse = vec![amp; n];
    pulse.extend(std::iter::repeat_n(0.0, 1000));
    let peak = filter_samples(&pulse, dt, &p).into_iter().fold(0.0, f64::max);
    let expected = lpf_pulse_peak(&p, width, amp).unwrap();
    let peak_err = (peak - expected).abs() / expected;
    (
        worst <= FILTER_REL_TOL && peak_err <= FILTER_REL_TOL,
        format!("step response max rel err {worst:.2e}, pulse peak rel err {peak_err:.2e} (≤ {FILTER_REL_TOL:e})"),
    )
}

/// Forward Euler of the ADEX equations at a fine step with end-of-step
/// threshold detection and a rectangular feedback pulse of width
/// `kick_width`.
fn adex_reference(p: &AdexParams, input: f64, t_end: f64, fine_dt: f64) -> Vec<f64> {
    let (mut i_mem, mut s) = (p.i_leak, 0.0);
    let mut pulse_until = f64::NEG_INFINITY;
    let mut spikes = Vec::new();
    for k in 0..(t_end / fine_dt).round() as usize {
        let t = k as f64 * fine_dt;
        let pulse = if t < pulse_until { p.pulse_amplitude } else { 0.0 };
        let arg = (i_mem.min(p.threshold + 10.0 * p.slope) - p.threshold) / p.slope;
        let di = (-p.alpha_l * (i_mem - p.i_leak) + p.alpha_l * p.slope * arg.exp() - s + input) / p.tau_mem;
        let ds = (p.alpha_s * (i_mem - p.i_leak) - s + p.fb_gain * pulse) / p.tau_w;
        i_mem += fine_dt * di;
        s += fine_dt * ds;
        if i_mem > p.threshold {
            spikes.push(t + fine_dt);
            i_mem = p.reset;
            pulse_until = t + fine_dt + p.kick_width;
        }
    }
    spikes
}

fn adex_accuracy() -> (bool, String) {
    let p = AdexParams::default();
    let x = Signal::dc(50.0, 3e-3, 1e6).unwrap();
    let coarse = encode(&x, &NeuronModel::Adex(p), false).unwrap().train;
    let fine = adex_reference(&p, 50.0, 3e-3, 1e-8);
    if coarse.len() < 10 || fine.len() < 10 {
        return (false, format!("only {} / {} spikes", coarse.len(), fine.len()));
    }
    let isi = (fine[9] - fine[0]) / 9.0;
    let worst = (0..10).map(|k| (coarse.times()[k] - fine[k]).abs()).fold(0.0, f64::max);
    (
        worst <= ADEX_SPIKE_TOL_FRAC_ISI * isi,
        format!(
            "first 10 spikes, worst timing error {:.2}% of mean ISI {:.2} µs (≤ {}%)",
            100.0 * worst / isi,
            isi * 1e6,
            100.0 * ADEX_SPIKE_TOL_FRAC_ISI
        ),
    )
}

fn esn_fidelity() -> (bool, String) {
    let scalar = EsnParams {
        w_in: nalgebra::DMatrix::from_element(1, 1, 1.0),
        w: nalgebra::DMatrix::from_element(1, 1, 0.5),
        bias: DVector::zeros(1),
        alpha: 0.5,
        w_out: None,
    };
    let s1 = esn_step(&EsnState::zeros(1), &DVector::from_element(1, 1.0), &scalar).s[0];
    let scalar_err = (s1 - 0.5 * 1f64.tanh()).abs();

    let mut p = esn_init(&EsnInit::default()).unwrap();
    let start = EsnState {
        s: DVector::from_fn(50, |i, _| (i as f64 * 0.37).sin() * 0.8),
    };
    let x = DVector::from_vec(vec![0.3, 1.0]);
    p.alpha = 1.0 - 1e-12;
    let full = esn_step(&start, &x, &p);
    let err_one = (full.s - p.drive(&start.s, &x).map(f64::tanh)).amax();
    p.alpha = 1e-12;
    let err_zero = (esn_step(&start, &x, &p).s - &start.s).amax();

    let mut contracting = 0;
    for seed in 1..=5u64 {
        let p = esn_init(&EsnInit { seed, ..EsnInit::default() }).unwrap();
        let mut a = EsnState { s: DVector::from_element(50, 0.9) };
        let mut b = EsnState { s: DVector::from_element(50, -0.9) };
        let d0 = (&a.s - &b.s).norm();
        for k in 0..200 {
            let x = DVector::from_vec(vec![(0.05 * k as f64).sin() * 0.5, 1.0]);
            a = esn_step(&a, &x, &p);
            b = esn_step(&b, &x, &p);
        }
        if (&a.s - &b.s).norm() < 0.5 * d0 {
            contracting += 1;
        }
    }
    (
        scalar_err <= ESN_SCALAR_TOL && err_one <= ESN_SCALAR_TOL && err_zero <= ESN_SCALAR_TOL && contracting == 5,
        format!(
            "scalar err {scalar_err:.1e}, α→1 err {err_one:.1e}, α→0 err {err_zero:.1e} (≤ {ESN_SCALAR_TOL:e}); contraction {contracting}/5 seeds"
        ),
    )
}

fn esn_mapping() -> (bool, String) {
    let cfg = Config::default();
    let demo = sdneuro::esn::run_esn_demo(&cfg.esn_demo()).unwrap();
    (
        demo.nrmse <= ESN_NRMSE_MAX && demo.passthrough_error <= ESN_PASSTHROUGH_TOL && !demo.saturated,
        format!(
            "{} nodes, NRMSE spiking vs float {:.4} (≤ {ESN_NRMSE_MAX}), pass-through max err {:.1e} (≤ {ESN_PASSTHROUGH_TOL:e}), saturated {}",
            cfg.esn.nodes, demo.nrmse, demo.passthrough_error, demo.saturated
        ),
    )
}

fn energy_accounting() -> (bool, String) {
    let e = energy_per_spike(1e-9, 100.0, 1.0).unwrap();
    let formula_ok = (e - 10e-12).abs() <= ENERGY_REL_TOL * 10e-12;
    let mut cases = 0;
    let mut ordered = 0;
    for &duration in &[1e-6, 1e-3, 0.27, 1.0, 10.0, 1e3] {
        for count in [0usize, 1, 10, 1000] {
            let times: Vec<f64> = (0..count).map(|k| (k as f64 + 0.5) * duration / count as f64).collect();
            let train = SpikeTrain::new(times, 1e-4, 100.0, duration).unwrap();
            let adex = EnergyProxy::ADEX.report(&train, duration).unwrap().total_energy;
            let sd = EnergyProxy::SIGMA_DELTA.report(&train, duration).unwrap().total_energy;
            cases += 1;
            if adex > sd {
                ordered += 1;
            }
        }
    }
    (
        formula_ok && ordered == cases,
        format!("(1 nJ, 100 Hz, 1 s) → {e:e} J (10 pJ expected); ADEX proxy > SD proxy in {ordered}/{cases} cases"),
    )
}

fn determinism() -> (bool, String) {
    let mut cfg = Config::default();
    cfg.sine_sweep.freqs_hz = vec![5.0, 50.0];
    cfg.sine_sweep.fb_gains = vec![1.0, 2.0];
    let mut compared = 0;
    let mut differing = Vec::new();
    for exp in Experiment::ALL {
        let a = run(exp, &cfg, Some(1)).unwrap();
        let b = run(exp, &cfg, None).unwrap();
        for (x, y) in a.artifacts.iter().zip(&b.artifacts) {
            if x.name.ends_with(".csv") {
                compared += 1;
                if x != y {
                    differing.push(x.name.clone());
                }
            }
        }
        if a.artifacts.len() != b.artifacts.len() {
            differing.push(format!("{} artifact count", exp.id()));
        }
    }
    (
        differing.is_empty() && compared > 0,
        format!("{compared} CSV artifacts over 5 experiments compared byte-for-byte; differing: {differing:?}"),
    )
}

#[test]
fn acceptance_criteria() {
    let outcomes = vec![
        check("1", "DC linearity", secs(10), dc_linearity),
        check("2", "Zero-input silence", secs(1), zero_input),
        check("3", "Slewing contrast", secs(30), slewing),
        check("3i", "Slewing invariant (narrow spikes more)", None, slewing_invariant),
        check("4", "Encoding quality", secs(60), encoding_quality),
        check("5", "Filter exactness", None, filter_exactness),
        check("6", "ADEX integration accuracy", None, adex_accuracy),
        check("7", "Update-equation fidelity", None, esn_fidelity),
        check("8", "ESN mapping", secs(300), esn_mapping),
        check("9", "Energy accounting", None, energy_accounting),
        check("10", "Determinism", None, determinism),
    ];
    println!();
    for o in &outcomes {
        let timing = match o.limit {
            Some(l) => format!("{:.2} s, limit {} s", o.elapsed.as_secs_f64(), l.as_secs()),
            None => format!("{:.2} s", o.elapsed.as_secs_f64()),
        };
        println!(
            "criterion {:>3} [{}] {}: {} ({timing})",
            o.id,
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    println!("{} of {} checks passed", outcomes.len() - failed.len(), outcomes.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
