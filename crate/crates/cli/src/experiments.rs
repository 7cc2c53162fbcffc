//! The five experiments. Each one returns its artifacts in memory; the
//! caller writes them.

use std::fs::File;
use std::io::BufReader;

use rayon::prelude::*;
use sdneuro::codec::{decode, encode, roundtrip, transient_skip, SpikeTrain};
use sdneuro::esn::run_esn_demo;
use sdneuro::metrics::{firing_rate, sdr_default_band, EnergyProxy};
use sdneuro::neurons::lif_rate;
use sdneuro::{NeuronModel, Signal, SineSpec};

use crate::config::{CodecAction, Config, ModelKind};
use crate::output::{format_float, Artifact, Csv, Plot, Series};
use crate::CliError;

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub artifacts: Vec<Artifact>,
    pub warnings: Vec<String>,
}

impl ExperimentOutput {
    fn push(&mut self, a: Artifact) {
        self.artifacts.push(a);
    }

    fn warn(&mut self, w: String) {
        self.warnings.push(w);
    }

    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }
}

fn sim(e: sdneuro::Error) -> CliError {
    CliError::Simulation(e.to_string())
}

fn proxy(kind: ModelKind) -> EnergyProxy {
    match kind {
        ModelKind::Adex => EnergyProxy::ADEX,
        ModelKind::Lif | ModelKind::Sd => EnergyProxy::SIGMA_DELTA,
    }
}

/// Keeps at most `max` evenly spaced points for plotting.
fn thin(points: Vec<(f64, f64)>, max: usize) -> Vec<(f64, f64)> {
    let stride = points.len().div_ceil(max.max(1)).max(1);
    points.into_iter().step_by(stride).collect()
}

fn series_of(x: &Signal, max: usize) -> Vec<(f64, f64)> {
    thin(x.samples().iter().enumerate().map(|(k, &v)| (x.time(k), v)).collect(), max)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcPoint {
    pub i_dc_na: f64,
    pub rate_hz: f64,
    pub energy_proxy_j: f64,
}

/// Firing rate against DC input over the configured current range.
pub fn dc_sweep(cfg: &Config) -> Result<ExperimentOutput, CliError> {
    let d = &cfg.dc_sweep;
    let rate = cfg.simulation.sample_rate_hz;
    let dt = 1.0 / rate;
    let model = cfg.model(d.model);
    let currents: Vec<f64> = (0..d.points)
        .map(|k| d.start_na + (d.stop_na - d.start_na) * k as f64 / (d.points - 1) as f64)
        .collect();
    let skip = match d.model {
        ModelKind::Lif => 0.0,
        _ => transient_skip(&model, &cfg.reconstruction.params()),
    };
    let results: Vec<Result<(DcPoint, SpikeTrain, bool), CliError>> = currents
        .par_iter()
        .map(|&i| {
            let x = Signal::dc(i, d.duration_s, rate).map_err(sim)?;
            let train = encode(&x, &model, false).map_err(sim)?.train;
            let (rate_hz, too_short) = match &model {
                NeuronModel::Lif(p) => {
                    let r = lif_rate(i, d.duration_s, p, dt).map_err(sim)?;
                    (r.rate_hz, r.too_short)
                }
                _ => {
                    let from = if skip < d.duration_s { skip } else { 0.0 };
                    let r = firing_rate(&train, (from, d.duration_s)).map_err(sim)?;
                    (r, i > 0.0 && train.len() < 2)
                }
            };
            let energy = proxy(d.model).report(&train, d.duration_s).map_err(sim)?.total_energy;
            Ok((
                DcPoint {
                    i_dc_na: i,
                    rate_hz,
                    energy_proxy_j: energy,
                },
                train,
                too_short,
            ))
        })
        .collect();

    let mut out = ExperimentOutput::default();
    let mut csv = Csv::new(&["i_dc_na", "rate_hz", "energy_proxy_j"]);
    let mut points = Vec::with_capacity(results.len());
    let mut strongest = None;
    for r in results {
        let (p, train, too_short) = r?;
        if too_short {
            out.warn(format!(
                "dc-sweep: {} nA produced fewer than two spikes in {} s; rate reported as 0",
                p.i_dc_na, d.duration_s
            ));
        }
        csv.row(&[p.i_dc_na, p.rate_hz, p.energy_proxy_j]);
        points.push(p);
        strongest = Some(train);
    }
    out.push(Artifact::text("dc_sweep.csv", csv.finish()));
    let plot = Plot::new(
        &format!("Firing rate vs DC input ({})", d.model.name()),
        "input current (nA)",
        "rate (Hz)",
    )
    .with(Series::new(
        d.model.name(),
        points.iter().map(|p| (p.i_dc_na, p.rate_hz)).collect(),
    ));
    out.push(Artifact::text("dc_sweep.svg", plot.render()));

    if d.energy_trace {
        let train = strongest.expect("at least two sweep points");
        let steps = 200;
        let times: Vec<f64> = (0..=steps).map(|k| d.duration_s * k as f64 / steps as f64).collect();
        let adex = EnergyProxy::ADEX.cumulative(&train, &times);
        let sd = EnergyProxy::SIGMA_DELTA.cumulative(&train, &times);
        let mut csv = Csv::new(&["time_s", "energy_adex_j", "energy_sd_j"]);
        for k in 0..times.len() {
            csv.row(&[times[k], adex[k], sd[k]]);
        }
        out.push(Artifact::text("dc_energy_trace.csv", csv.finish()));
        let plot = Plot::new(
            &format!("Cumulative energy proxy at {} nA", d.stop_na),
            "time (s)",
            "energy (J)",
        )
        .with(Series::new("adex proxy", times.iter().copied().zip(adex).collect()))
        .with(Series::new("sd proxy", times.iter().copied().zip(sd).collect()));
        out.push(Artifact::text("dc_energy_trace.svg", plot.render()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinePoint {
    pub freq_hz: f64,
    pub fb_gain: f64,
    pub sdr_db: f64,
    pub energy_proxy_j: f64,
}

fn with_fb_gain(model: &NeuronModel, gain: f64) -> NeuronModel {
    match model {
        NeuronModel::SigmaDelta(p) => NeuronModel::SigmaDelta(p.with_fb_gain(gain)),
        NeuronModel::Lif(p) => NeuronModel::Lif(p.lif()),
        NeuronModel::Adex(p) => NeuronModel::Adex(sdneuro::neurons::AdexParams { fb_gain: gain, ..*p }),
    }
}

/// Simulated span holding the transient plus ten whole cycles of `freq`.
pub fn sdr_duration(skip: f64, freq: f64, min: f64, sample_rate: f64) -> f64 {
    (skip + 10.0 / freq + 2.0 / sample_rate).max(min)
}

/// One grid point of the SDR sweep.
pub fn sine_point(
    cfg: &Config,
    kind: ModelKind,
    freq: f64,
    gain: f64,
) -> Result<(SinePoint, Option<String>), CliError> {
    let s = &cfg.sine_sweep;
    let rate = cfg.simulation.sample_rate_hz;
    let f = cfg.reconstruction.params();
    let model = with_fb_gain(&cfg.model(kind), gain);
    let skip = transient_skip(&model, &f);
    let duration = sdr_duration(skip, freq, s.min_duration_s, rate);
    let spec = SineSpec {
        amplitude: s.amplitude_na,
        freq,
        offset: s.offset_na,
        phase: 0.0,
    };
    let x = Signal::sine(&spec, duration, rate).map_err(sim)?;
    let rt = roundtrip(&x, &model, &f).map_err(sim)?;
    let energy = proxy(kind).report(&rt.train, duration).map_err(sim)?.total_energy;
    let (sdr_db, note) = match sdr_default_band(&rt.reconstruction, freq, skip) {
        Ok(r) => (r.sdr_db, None),
        Err(e) => (
            f64::NAN,
            Some(format!("sine-sweep {}: {freq} Hz, fb_gain {gain}: {e}", kind.name())),
        ),
    };
    let mut warn = note;
    if let NeuronModel::SigmaDelta(p) = &model {
        let peak = s.offset_na + s.amplitude_na;
        if p.full_scale() < peak && warn.is_none() {
            warn = Some(format!(
                "sine-sweep sd: fb_gain {gain} gives {} nA full-scale feedback, below the {peak} nA input peak; the loop saturates",
                p.full_scale()
            ));
        }
    }
    Ok((
        SinePoint {
            freq_hz: freq,
            fb_gain: gain,
            sdr_db,
            energy_proxy_j: energy,
        },
        warn,
    ))
}

/// SDR over a frequency × feedback-gain grid, one CSV per model.
pub fn sine_sweep(cfg: &Config) -> Result<ExperimentOutput, CliError> {
    let s = &cfg.sine_sweep;
    let mut out = ExperimentOutput::default();
    for &kind in &s.models {
        let mut grid: Vec<(f64, f64)> = Vec::new();
        for &f in &s.freqs_hz {
            for &g in &s.fb_gains {
                grid.push((f, g));
            }
        }
        grid.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let results: Vec<_> = grid.par_iter().map(|&(f, g)| sine_point(cfg, kind, f, g)).collect();
        let mut csv = Csv::new(&["freq_hz", "fb_gain", "sdr_db", "energy_proxy_j"]);
        let mut points = Vec::new();
        for r in results {
            let (p, w) = r?;
            if let Some(w) = w {
                out.warn(w);
            }
            csv.row(&[p.freq_hz, p.fb_gain, p.sdr_db, p.energy_proxy_j]);
            points.push(p);
        }
        out.push(Artifact::text(format!("sine_sweep_{}.csv", kind.name()), csv.finish()));
        let mut gains: Vec<f64> = s.fb_gains.clone();
        gains.sort_by(f64::total_cmp);
        gains.dedup();
        let mut plot = Plot::new(
            &format!("SDR vs input frequency ({})", kind.name()),
            "frequency (Hz)",
            "SDR (dB)",
        )
        .log_x();
        for g in gains {
            plot = plot.with(Series::new(
                format!("fb_gain {g}"),
                points.iter().filter(|p| p.fb_gain == g).map(|p| (p.freq_hz, p.sdr_db)).collect(),
            ));
        }
        out.push(Artifact::text(format!("sine_sweep_{}.svg", kind.name()), plot.render()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlewRow {
    pub pulse_width_s: f64,
    pub fb_gain: f64,
    pub spikes: usize,
    pub sdr_db: f64,
    pub energy_proxy_j: f64,
}

pub const SLEW_CONFIGS: [&str; 3] = ["extended", "narrow", "narrow_uncompensated"];

/// The three feedback-pulse variants compared by the slew demo.
pub fn slew_variants(cfg: &Config) -> Vec<(&'static str, NeuronModel)> {
    let dt = 1.0 / cfg.simulation.sample_rate_hz;
    let p = cfg.sd_params();
    let raw = sdneuro::neurons::SdNeuronParams {
        pulse_width: dt,
        ..p
    };
    vec![
        (SLEW_CONFIGS[0], NeuronModel::SigmaDelta(p)),
        (SLEW_CONFIGS[1], NeuronModel::SigmaDelta(p.narrow_pulse(dt))),
        (SLEW_CONFIGS[2], NeuronModel::SigmaDelta(raw)),
    ]
}

pub fn slew_row(cfg: &Config, model: &NeuronModel) -> Result<SlewRow, CliError> {
    let w = &cfg.slew;
    let rate = cfg.simulation.sample_rate_hz;
    let f = cfg.reconstruction.params();
    let skip = transient_skip(model, &f);
    let spec = SineSpec {
        amplitude: w.amplitude_na,
        freq: w.freq_hz,
        offset: w.offset_na,
        phase: 0.0,
    };
    let duration = skip + w.duration_s;
    let x = Signal::sine(&spec, duration, rate).map_err(sim)?;
    let rt = roundtrip(&x, model, &f).map_err(sim)?;
    let sdr_db = sdr_default_band(&rt.reconstruction, w.freq_hz, skip).map_or(f64::NAN, |r| r.sdr_db);
    let NeuronModel::SigmaDelta(p) = model else {
        unreachable!("slew variants are sigma-delta neurons")
    };
    Ok(SlewRow {
        pulse_width_s: p.pulse_width,
        fb_gain: p.fb_filter.gain,
        spikes: rt.train.len(),
        sdr_db,
        energy_proxy_j: EnergyProxy::SIGMA_DELTA.report(&rt.train, duration).map_err(sim)?.total_energy,
    })
}

/// Narrow vs extended feedback pulses on the same sinusoid.
pub fn slew_demo(cfg: &Config) -> Result<ExperimentOutput, CliError> {
    let w = &cfg.slew;
    let rate = cfg.simulation.sample_rate_hz;
    let variants = slew_variants(cfg);
    let rows: Vec<Result<SlewRow, CliError>> = variants.par_iter().map(|(_, m)| slew_row(cfg, m)).collect();
    let mut out = ExperimentOutput::default();
    // Built by hand: the first column is a label.
    let mut text = String::from("config,pulse_width_s,fb_gain,spikes,sdr_db,energy_proxy_j\n");
    let mut parsed = Vec::new();
    for ((name, _), r) in variants.iter().zip(rows) {
        let r = r?;
        text.push_str(&format!(
            "{name},{},{},{},{},{}\n",
            format_float(r.pulse_width_s),
            format_float(r.fb_gain),
            r.spikes,
            format_float(r.sdr_db),
            format_float(r.energy_proxy_j)
        ));
        parsed.push(r);
    }
    let mut csv = Csv::new(&["spike_ratio_narrow_to_extended", "sdr_gap_db"]);
    csv.row(&[
        parsed[1].spikes as f64 / parsed[0].spikes.max(1) as f64,
        parsed[1].sdr_db - parsed[0].sdr_db,
    ]);
    out.push(Artifact::text("slew_summary.csv", text));
    out.push(Artifact::text("slew_ratio.csv", csv.finish()));

    let spec = SineSpec {
        amplitude: w.amplitude_na,
        freq: w.freq_hz,
        offset: w.offset_na,
        phase: 0.0,
    };
    let x = Signal::sine(&spec, w.trace_s, rate).map_err(sim)?;
    let mut plot = Plot::new("Feedback current: narrow vs extended pulses", "time (s)", "current (nA)")
        .with(Series::new("input", series_of(&x, 2000)));
    for (name, model) in &variants[..2] {
        let enc = encode(&x, model, true).map_err(sim)?;
        let trace = enc.trace.expect("trace requested");
        let mut buf = Vec::new();
        trace.write_csv(&mut buf, w.trace_stride).map_err(CliError::Io)?;
        out.push(Artifact::new(format!("slew_trace_{name}.csv"), buf));
        let fb = Signal::new(trace.feedback.clone(), rate).map_err(sim)?;
        plot = plot.with(Series::new(format!("s(t) {name}"), series_of(&fb, 2000)));
    }
    out.push(Artifact::text("slew_demo.svg", plot.render()));
    Ok(out)
}

// ---------------------------------------------------------------------------

/// Floating-point vs spiking reservoir on the demo task.
pub fn esn_demo(cfg: &Config) -> Result<ExperimentOutput, CliError> {
    let demo = cfg.esn_demo();
    let o = run_esn_demo(&demo).map_err(sim)?;
    let mut out = ExperimentOutput::default();
    if o.saturated {
        out.warn(format!(
            "esn-demo: node encoders saturated ({:.2}% of node-ticks pegged); reduce esn.scale",
            100.0 * o.pegged_fraction
        ));
    }
    let mut csv = Csv::new(&["time_s", "readout_float", "readout_spiking"]);
    for k in 0..o.readout_float.len() {
        csv.row(&[k as f64 / demo.tick_hz, o.readout_float[k], o.readout_spiking[k]]);
    }
    out.push(Artifact::text("esn_trace.csv", csv.finish()));
    let mut csv = Csv::new(&["nrmse_spiking_vs_float", "nrmse_float_vs_target", "passthrough_max_error", "pegged_fraction"]);
    csv.row(&[o.nrmse, o.task_nrmse, o.passthrough_error, o.pegged_fraction]);
    out.push(Artifact::text("esn_summary.csv", csv.finish()));
    let mut buf = Vec::new();
    o.network.write_text(&mut buf).map_err(CliError::Io)?;
    out.push(Artifact::new("esn_network.txt", buf));
    let t = |v: &[f64]| -> Vec<(f64, f64)> {
        v.iter().enumerate().map(|(k, &y)| (k as f64 / demo.tick_hz, y)).collect()
    };
    let plot = Plot::new("Floating-point vs spiking reservoir readout", "time (s)", "readout")
        .with(Series::new("float", t(&o.readout_float)))
        .with(Series::new("spiking", t(&o.readout_spiking)));
    out.push(Artifact::text("esn_trace.svg", plot.render()));
    Ok(out)
}

// ---------------------------------------------------------------------------

fn read_signal(cfg: &Config) -> Result<Signal, CliError> {
    match &cfg.codec.signal_path {
        Some(p) => {
            let f = File::open(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            Signal::read_csv(BufReader::new(f)).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
        None => Signal::sine(&cfg.signal.spec(), cfg.signal.duration_s, cfg.simulation.sample_rate_hz)
            .map_err(|e| CliError::Config(format!("[signal]: {e}"))),
    }
}

fn train_csv(train: &SpikeTrain) -> Result<Artifact, CliError> {
    let mut buf = Vec::new();
    train.write_csv(&mut buf).map_err(CliError::Io)?;
    Ok(Artifact::new("spikes.csv", buf))
}

fn signal_csv(name: &str, x: &Signal) -> Result<Artifact, CliError> {
    let mut buf = Vec::new();
    x.write_csv(&mut buf).map_err(CliError::Io)?;
    Ok(Artifact::new(name, buf))
}

/// Encode a signal CSV, decode a spike CSV, or both.
pub fn codec(cfg: &Config) -> Result<ExperimentOutput, CliError> {
    let c = &cfg.codec;
    let model = cfg.model(c.model);
    let f = cfg.reconstruction.params();
    let mut out = ExperimentOutput::default();
    match c.action {
        CodecAction::Encode | CodecAction::Roundtrip => {
            let x = read_signal(cfg)?;
            let enc = encode(&x, &model, c.trace).map_err(|e| CliError::Input(e.to_string()))?;
            out.push(train_csv(&enc.train)?);
            if let Some(trace) = &enc.trace {
                let mut buf = Vec::new();
                trace.write_csv(&mut buf, c.trace_stride).map_err(CliError::Io)?;
                out.push(Artifact::new("codec_trace.csv", buf));
            }
            let mut plot = Plot::new("Codec", "time (s)", "current (nA)").with(Series::new("input", series_of(&x, 2000)));
            if c.action == CodecAction::Roundtrip {
                let y = decode(&enc.train, &f, x.sample_rate()).map_err(sim)?;
                out.push(signal_csv("reconstruction.csv", &y)?);
                plot = plot.with(Series::new("reconstruction", series_of(&y, 2000)));
            }
            out.push(Artifact::text("codec.svg", plot.render()));
        }
        CodecAction::Decode => {
            let path = c.spikes_path.as_ref().expect("validated");
            let rate = cfg.simulation.sample_rate_hz;
            let enc = model.build(1.0 / rate).map_err(sim)?;
            let (pw, amp) = (enc.pulse_width(), enc.pulse_amplitude());
            let open = || {
                File::open(path)
                    .map(BufReader::new)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
            };
            let parsed = SpikeTrain::read_csv(open()?, pw, amp, f64::MAX)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let duration = c
                .duration_s
                .unwrap_or_else(|| parsed.times().last().map_or(pw, |&t| t + pw));
            let train = SpikeTrain::new(parsed.times().to_vec(), pw, amp, duration)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let y = decode(&train, &f, rate).map_err(sim)?;
            out.push(signal_csv("reconstruction.csv", &y)?);
            let plot = Plot::new("Decoded spike train", "time (s)", "current (nA)")
                .with(Series::new("reconstruction", series_of(&y, 2000)));
            out.push(Artifact::text("codec.svg", plot.render()));
        }
    }
    Ok(out)
}
