//! Signal → spike train → reconstructed signal.

use std::io::{BufRead, Write};

use crate::error::{ensure, Error, Result};
use crate::filters::{filter_samples, FilterParams};
use crate::metrics::{derivative, fit_delayed, DelayedFit};
use crate::neurons::{AdexNeuron, AdexParams, Encoder, SdNeuron, SdNeuronParams};
use crate::signals::Signal;

/// Which encoder to run, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeuronModel {
    /// Sigma-delta neuron with the feedback filter disabled.
    Lif(SdNeuronParams),
    Adex(AdexParams),
    SigmaDelta(SdNeuronParams),
}

impl NeuronModel {
    pub fn name(&self) -> &'static str {
        match self {
            NeuronModel::Lif(_) => "lif",
            NeuronModel::Adex(_) => "adex",
            NeuronModel::SigmaDelta(_) => "sd",
        }
    }

    pub fn build(&self, dt: f64) -> Result<Box<dyn Encoder>> {
        Ok(match self {
            NeuronModel::Lif(p) => Box::new(SdNeuron::new(p.lif(), dt)?),
            NeuronModel::SigmaDelta(p) => Box::new(SdNeuron::new(*p, dt)?),
            NeuronModel::Adex(p) => Box::new(AdexNeuron::new(*p, dt)?),
        })
    }

    /// Time constant of the feedback filter.
    pub fn feedback_tau(&self) -> f64 {
        match self {
            NeuronModel::Lif(p) | NeuronModel::SigmaDelta(p) => p.fb_filter.tau,
            NeuronModel::Adex(p) => p.tau_w,
        }
    }
}

/// Settling time excluded from every metric: five time constants of the
/// slower of the feedback and reconstruction filters.
pub fn transient_skip(model: &NeuronModel, reconstruction: &FilterParams) -> f64 {
    5.0 * model.feedback_tau().max(reconstruction.tau)
}

/// Spike times plus the pulse each spike is rendered as.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTrain {
    times: Vec<f64>,
    pub pulse_width: f64,
    pub pulse_amplitude: f64,
    pub duration: f64,
}

impl SpikeTrain {
    pub fn new(times: Vec<f64>, pulse_width: f64, pulse_amplitude: f64, duration: f64) -> Result<Self> {
        ensure(duration > 0.0, || format!("duration must be positive, got {duration}"))?;
        ensure(pulse_width >= 0.0, || "pulse width must be non-negative".into())?;
        for (k, &t) in times.iter().enumerate() {
            ensure((0.0..=duration).contains(&t), || {
                format!("spike {k} at {t} s lies outside [0, {duration}]")
            })?;
            if k > 0 {
                ensure(t > times[k - 1], || {
                    format!("spike times not strictly increasing at index {k}")
                })?;
            }
        }
        Ok(Self {
            times,
            pulse_width,
            pulse_amplitude,
            duration,
        })
    }

    pub fn empty(pulse_width: f64, pulse_amplitude: f64, duration: f64) -> Self {
        Self {
            times: Vec::new(),
            pulse_width,
            pulse_amplitude,
            duration,
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn inter_spike_intervals(&self) -> Vec<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "spike_time_s")?;
        for t in &self.times {
            writeln!(w, "{t}")?;
        }
        Ok(())
    }

    /// Reads a `spike_time_s` column; the pulse shape and duration are not
    /// part of the file and must be supplied.
    pub fn read_csv<R: BufRead>(
        reader: R,
        pulse_width: f64,
        pulse_amplitude: f64,
        duration: f64,
    ) -> Result<Self> {
        let mut times = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Parse {
                line: idx + 1,
                msg: e.to_string(),
            })?;
            let line = line.trim();
            if idx == 0 {
                if line != "spike_time_s" {
                    return Err(Error::Parse {
                        line: 1,
                        msg: format!("expected header `spike_time_s`, got `{line}`"),
                    });
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let t: f64 = line.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                msg: format!("not a number: `{line}`"),
            })?;
            times.push(t);
        }
        Self::new(times, pulse_width, pulse_amplitude, duration)
    }
}

/// Per-sample internal waveforms of an encoding run.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodeTrace {
    pub sample_rate: f64,
    pub input: Vec<f64>,
    pub i_mem: Vec<f64>,
    pub feedback: Vec<f64>,
    pub pulse: Vec<f64>,
}

impl EncodeTrace {
    /// Writes every `stride`-th sample.
    pub fn write_csv<W: Write>(&self, mut w: W, stride: usize) -> std::io::Result<()> {
        writeln!(w, "time_s,i_na,imem_na,s_na,pulse_na")?;
        for k in (0..self.input.len()).step_by(stride.max(1)) {
            writeln!(
                w,
                "{},{},{},{},{}",
                k as f64 / self.sample_rate,
                self.input[k],
                self.i_mem[k],
                self.feedback[k],
                self.pulse[k]
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Encoded {
    pub train: SpikeTrain,
    pub trace: Option<EncodeTrace>,
}

/// Runs `model` over every sample of `x` at the signal's own time step.
pub fn encode(x: &Signal, model: &NeuronModel, keep_trace: bool) -> Result<Encoded> {
    if let Some(k) = x.samples().iter().position(|&v| v < 0.0) {
        return Err(Error::Domain(format!(
            "sample {k} is negative ({}): the encoders are unipolar",
            x.samples()[k]
        )));
    }
    let dt = x.dt();
    let mut neuron = model.build(dt)?;
    let n = x.len();
    let mut trace = keep_trace.then(|| EncodeTrace {
        sample_rate: x.sample_rate(),
        input: x.samples().to_vec(),
        i_mem: Vec::with_capacity(n),
        feedback: Vec::with_capacity(n),
        pulse: Vec::with_capacity(n),
    });
    let mut times = Vec::new();
    for (k, &i) in x.samples().iter().enumerate() {
        let out = neuron.step(i);
        if out.spiked {
            times.push((k as f64 + out.spike_offset) * dt);
        }
        if let Some(tr) = trace.as_mut() {
            tr.i_mem.push(neuron.i_mem());
            tr.feedback.push(neuron.feedback());
            tr.pulse.push(out.pulse_level);
        }
    }
    Ok(Encoded {
        train: SpikeTrain {
            times,
            pulse_width: neuron.pulse_width(),
            pulse_amplitude: neuron.pulse_amplitude(),
            duration: x.duration(),
        },
        trace,
    })
}

/// Renders the train as a level-valued pulse waveform on the sample grid.
///
/// Overlapping pulses saturate at the pulse amplitude.
pub fn render_pulses(train: &SpikeTrain, sample_rate: f64) -> Vec<f64> {
    let n = (train.duration * sample_rate).round() as usize;
    let width = ((train.pulse_width * sample_rate) - 1e-9).ceil().max(1.0) as usize;
    let mut level = vec![0.0; n];
    // Pulses are processed in order, so tracking the furthest lit sample
    // avoids rewriting overlaps.
    let mut lit_until = 0usize;
    for &t in &train.times {
        let start = ((t * sample_rate) + 1e-6).floor() as usize;
        let end = (start + width).min(n);
        for v in &mut level[start.max(lit_until).min(end)..end] {
            *v = train.pulse_amplitude;
        }
        lit_until = lit_until.max(end);
    }
    level
}

/// Low-pass filters the rendered pulse train.
pub fn decode(train: &SpikeTrain, f: &FilterParams, sample_rate: f64) -> Result<Signal> {
    f.validate()?;
    ensure(sample_rate > 0.0, || "sample rate must be positive".into())?;
    let pulses = render_pulses(train, sample_rate);
    ensure(!pulses.is_empty(), || "spike train spans no samples".into())?;
    Signal::new(filter_samples(&pulses, 1.0 / sample_rate, f), sample_rate)
}

#[derive(Debug, Clone)]
pub struct Roundtrip {
    pub train: SpikeTrain,
    pub reconstruction: Signal,
    /// Reconstruction minus the best gain/offset/delay fit of the loop
    /// reference.
    pub residual: Signal,
    pub fit: DelayedFit,
    /// Seconds excluded from the fit.
    pub skip: f64,
}

/// Input shaped by the loop's ideal signal transfer `F(s)/H(s)`.
///
/// A feedback loop drives its pulse stream to `H⁻¹` of a feedback that
/// tracks the input, so the decoded stream ideally equals the input
/// through `(1 + sτ_H)/(1 + sτ_F)`. Without feedback (LIF) the rate
/// follows the input directly and the reference is `F(x)`.
pub fn loop_reference(x: &Signal, model: &NeuronModel, f: &FilterParams) -> Vec<f64> {
    let tau_h = match model {
        NeuronModel::Lif(_) => 0.0,
        _ => model.feedback_tau(),
    };
    let z = filter_samples(x.samples(), x.dt(), f);
    z.iter()
        .zip(x.samples())
        .map(|(&z, &v)| z + tau_h * (f.gain * v - z) / f.tau)
        .collect()
}

/// Encodes then decodes `x`.
///
/// The residual is taken against [`loop_reference`] after a gain, offset
/// and delay fit, so neither the reconstruction filter's lag, the loop's
/// phase lead nor its small residual latency counts as error.
pub fn roundtrip(x: &Signal, model: &NeuronModel, f: &FilterParams) -> Result<Roundtrip> {
    let train = encode(x, model, false)?.train;
    let reconstruction = decode(&train, f, x.sample_rate())?;
    let reference = loop_reference(x, model, f);
    let slope = derivative(&reference, x.dt());
    let skip = transient_skip(model, f);
    let from = x.index_at(skip).min(x.len().saturating_sub(1));
    let fit = fit_delayed(&reference[from..], &reconstruction.samples()[from..], x.dt());
    let residual: Vec<f64> = reference
        .iter()
        .zip(&slope)
        .zip(reconstruction.samples())
        .map(|((&r, &d), y)| y - fit.predict(r, d))
        .collect();
    Ok(Roundtrip {
        train,
        residual: Signal::new(residual, x.sample_rate())?,
        reconstruction,
        fit,
        skip,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::lpf_pulse_peak;
    use approx::assert_relative_eq;

    const RATE: f64 = 1e6;

    fn recon_filter() -> FilterParams {
        FilterParams::new(1.0, 10e-3).unwrap()
    }

    #[test]
    fn zero_signal_gives_empty_train() {
        let x = Signal::dc(0.0, 0.1, RATE).unwrap();
        for model in [
            NeuronModel::SigmaDelta(SdNeuronParams::default()),
            NeuronModel::Lif(SdNeuronParams::default()),
            NeuronModel::Adex(AdexParams::default()),
        ] {
            assert!(encode(&x, &model, false).unwrap().train.is_empty());
        }
    }

    #[test]
    fn negative_sample_rejected() {
        let x = Signal::new(vec![1.0, -0.1, 1.0], RATE).unwrap();
        let model = NeuronModel::SigmaDelta(SdNeuronParams::default());
        assert!(matches!(encode(&x, &model, false), Err(Error::Domain(_))));
    }

    #[test]
    fn empty_train_decodes_to_zero() {
        let t = SpikeTrain::empty(1e-4, 100.0, 0.01);
        let y = decode(&t, &recon_filter(), RATE).unwrap();
        assert_eq!(y.len(), 10_000);
        assert!(y.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_pulse_peak() {
        let f = recon_filter();
        let t = SpikeTrain::new(vec![0.0], 1e-4, 100.0, 0.01).unwrap();
        let y = decode(&t, &f, RATE).unwrap();
        let expected = lpf_pulse_peak(&f, 1e-4, 100.0).unwrap();
        assert_relative_eq!(y.max(), expected, max_relative = 1e-6);
    }

    #[test]
    fn periodic_train_mean() {
        let f = FilterParams::new(2.0, 10e-3).unwrap();
        let rate = 500.0;
        let times: Vec<f64> = (0..500).map(|k| k as f64 / rate).collect();
        let t = SpikeTrain::new(times, 1e-4, 100.0, 1.0).unwrap();
        let y = decode(&t, &f, RATE).unwrap();
        let tail = y.tail_from(0.1);
        let mean = tail.iter().sum::<f64>() / tail.len() as f64;
        let expected = 2.0 * 100.0 * rate * 1e-4;
        assert!((mean - expected).abs() / expected < 0.01, "{mean} vs {expected}");
    }

    #[test]
    fn overlapping_pulses_saturate() {
        let t = SpikeTrain::new(vec![0.0, 50e-6], 1e-4, 7.0, 1e-3).unwrap();
        let p = render_pulses(&t, RATE);
        assert!(p[..150].iter().all(|&v| v == 7.0));
        assert!(p[150..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn train_validation() {
        assert!(SpikeTrain::new(vec![0.2, 0.1], 1e-4, 1.0, 1.0).is_err());
        assert!(SpikeTrain::new(vec![0.1, 0.1], 1e-4, 1.0, 1.0).is_err());
        assert!(SpikeTrain::new(vec![1.5], 1e-4, 1.0, 1.0).is_err());
    }

    #[test]
    fn decoded_pulses_match_neuron_feedback() {
        // With F = H the reconstruction is the neuron's own feedback current.
        let p = SdNeuronParams::default();
        let x = Signal::sine(&crate::signals::SineSpec::biased(20.0, 30.0), 0.05, RATE).unwrap();
        let enc = encode(&x, &NeuronModel::SigmaDelta(p), true).unwrap();
        let y = decode(&enc.train, &p.fb_filter, RATE).unwrap();
        let tr = enc.trace.unwrap();
        for (a, b) in y.samples().iter().zip(&tr.feedback) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn spike_csv_round_trip() {
        let t = SpikeTrain::new(vec![1e-6, 0.25, 0.5], 1e-4, 100.0, 1.0).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = SpikeTrain::read_csv(buf.as_slice(), 1e-4, 100.0, 1.0).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn zero_roundtrip() {
        let x = Signal::dc(0.0, 0.06, RATE).unwrap();
        let rt = roundtrip(&x, &NeuronModel::SigmaDelta(SdNeuronParams::default()), &recon_filter()).unwrap();
        assert!(rt.reconstruction.samples().iter().all(|&v| v == 0.0));
        assert!(rt.residual.samples().iter().all(|&v| v == 0.0));
    }
}
