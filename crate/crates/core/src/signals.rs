//! Uniformly sampled current waveforms.
//!
//! All currents are in nA and all times in seconds. Unit conversion from
//! pA or µA happens at the edges (CLI, CSV ingestion), never in here.

use std::f64::consts::TAU;
use std::io::{BufRead, Write};

use crate::error::{ensure, Error, Result};

/// Default simulation rate, 1 MHz (dt = 1 µs).
pub const DEFAULT_SAMPLE_RATE: f64 = 1.0e6;

/// Tolerance on the time column of ingested CSV waveforms.
pub const CSV_TIME_TOLERANCE: f64 = 1e-9;

/// A uniformly sampled, finite, non-empty current waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        ensure(sample_rate.is_finite() && sample_rate > 0.0, || {
            format!("sample rate must be positive, got {sample_rate}")
        })?;
        ensure(!samples.is_empty(), || "signal has no samples".into())?;
        if let Some(k) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::Argument(format!(
                "sample {k} is not finite ({})",
                samples[k]
            )));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Constant level held for `duration` seconds.
    pub fn dc(level: f64, duration: f64, sample_rate: f64) -> Result<Self> {
        let n = sample_count(duration, sample_rate)?;
        Self::new(vec![level; n], sample_rate)
    }

    /// Sinusoid riding on a DC offset, `offset + amplitude * sin(2π f t + phase)`.
    ///
    /// The encoders are unipolar, so the offset must cover the amplitude.
    pub fn sine(spec: &SineSpec, duration: f64, sample_rate: f64) -> Result<Self> {
        let SineSpec {
            amplitude,
            freq,
            offset,
            phase,
        } = *spec;
        ensure(amplitude >= 0.0 && amplitude.is_finite(), || {
            format!("amplitude must be non-negative, got {amplitude}")
        })?;
        ensure(freq >= 0.0 && freq.is_finite(), || {
            format!("frequency must be non-negative, got {freq}")
        })?;
        ensure(sample_rate > 2.0 * freq, || {
            format!("sample rate {sample_rate} Hz does not exceed Nyquist for {freq} Hz")
        })?;
        if offset < amplitude {
            return Err(Error::Domain(format!(
                "offset {offset} nA below amplitude {amplitude} nA: the encoders only encode positive inputs"
            )));
        }
        let n = sample_count(duration, sample_rate)?;
        let w = TAU * freq / sample_rate;
        let samples = (0..n)
            .map(|k| offset + amplitude * (w * k as f64 + phase).sin())
            .collect();
        Self::new(samples, sample_rate)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.sample_rate
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the first sample at or after `t` seconds.
    pub fn index_at(&self, t: f64) -> usize {
        ((t * self.sample_rate).round().max(0.0) as usize).min(self.samples.len())
    }

    /// Samples from time `t` to the end.
    pub fn tail_from(&self, t: f64) -> &[f64] {
        &self.samples[self.index_at(t)..]
    }

    /// Reads the two-column `time_s,current_na` format.
    ///
    /// The time column must be strictly increasing and uniform to within
    /// [`CSV_TIME_TOLERANCE`]; the sample rate is inferred from it.
    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        match lines.next() {
            Some((_, Ok(h))) if h.trim() == "time_s,current_na" => {}
            Some((_, Ok(h))) => {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("expected header `time_s,current_na`, got `{}`", h.trim()),
                })
            }
            Some((_, Err(e))) => return Err(io_parse(1, e)),
            None => {
                return Err(Error::Parse {
                    line: 1,
                    msg: "empty file".into(),
                })
            }
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line.map_err(|e| io_parse(lineno, e))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let (Some(t), Some(v), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "expected two columns".into(),
                });
            };
            times.push(parse_f64(t, lineno)?);
            values.push(parse_f64(v, lineno)?);
        }
        if times.len() < 2 {
            return Err(Error::Parse {
                line: times.len() + 1,
                msg: "need at least two rows to infer the sample rate".into(),
            });
        }
        let dt = times[1] - times[0];
        if !(dt > 0.0) {
            return Err(Error::Parse {
                line: 3,
                msg: "time column is not strictly increasing".into(),
            });
        }
        for (k, &t) in times.iter().enumerate().skip(1) {
            if t <= times[k - 1] {
                return Err(Error::Parse {
                    line: k + 2,
                    msg: "time column is not strictly increasing".into(),
                });
            }
            let expected = times[0] + k as f64 * dt;
            if (t - expected).abs() > CSV_TIME_TOLERANCE {
                return Err(Error::Parse {
                    line: k + 2,
                    msg: format!("non-uniform sampling: t = {t}, expected {expected}"),
                });
            }
        }
        Self::new(values, 1.0 / dt)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "time_s,current_na")?;
        for (k, v) in self.samples.iter().enumerate() {
            writeln!(w, "{},{}", self.time(k), v)?;
        }
        Ok(())
    }
}

/// Parameters of a biased sinusoid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineSpec {
    pub amplitude: f64,
    pub freq: f64,
    pub offset: f64,
    pub phase: f64,
}

impl SineSpec {
    /// A sinusoid of `amplitude` nA riding on an equal DC bias, the
    /// smallest bias that keeps the signal non-negative.
    pub fn biased(amplitude: f64, freq: f64) -> Self {
        Self {
            amplitude,
            freq,
            offset: amplitude,
            phase: 0.0,
        }
    }
}

fn sample_count(duration: f64, sample_rate: f64) -> Result<usize> {
    ensure(duration.is_finite() && duration > 0.0, || {
        format!("duration must be positive, got {duration}")
    })?;
    ensure(sample_rate.is_finite() && sample_rate > 0.0, || {
        format!("sample rate must be positive, got {sample_rate}")
    })?;
    let n = (duration * sample_rate).round();
    ensure(n >= 1.0, || {
        format!("duration {duration} s holds no samples at {sample_rate} Hz")
    })?;
    Ok(n as usize)
}

fn parse_f64(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("not a number: `{}`", s.trim()),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite value `{}`", s.trim()),
        });
    }
    Ok(v)
}

fn io_parse(line: usize, e: std::io::Error) -> Error {
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}
