//! Figures of merit: signal-to-distortion ratio, firing rate and the
//! energy-per-spike accounting.

use std::fmt;

use rustfft::{num_complex::Complex, FftPlanner};

use crate::codec::SpikeTrain;
use crate::error::{ensure, Error, Result};
use crate::signals::Signal;

/// Upper edge of the distortion band as a multiple of the fundamental.
pub const DEFAULT_BAND_MULTIPLE: f64 = 25.0;

/// Minimum number of whole fundamental cycles in an SDR segment.
pub const MIN_SDR_CYCLES: usize = 10;

/// `y ≈ gain·x + offset` in the least-squares sense.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub gain: f64,
    pub offset: f64,
}

/// Least-squares gain and offset of `y` against `x`.
///
/// A constant `x` carries no gain information; the fit then reduces to the
/// mean of `y`.
pub fn fit_gain_offset(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len().min(y.len());
    if n == 0 {
        return LinearFit {
            gain: 0.0,
            offset: 0.0,
        };
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x[..n].iter().zip(&y[..n]) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let gain = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    LinearFit {
        gain,
        offset: my - gain * mx,
    }
}

/// `y(t) ≈ gain·x(t − delay) + offset`, linearised in the delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayedFit {
    pub gain: f64,
    pub offset: f64,
    pub delay: f64,
}

impl DelayedFit {
    /// Fitted value given the reference sample and its time derivative.
    pub fn predict(&self, x: f64, dx: f64) -> f64 {
        self.offset + self.gain * (x - self.delay * dx)
    }
}

/// Central-difference time derivative (one-sided at the ends).
pub fn derivative(x: &[f64], dt: f64) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|k| {
            if k == 0 {
                (x[1] - x[0]) / dt
            } else if k == n - 1 {
                (x[k] - x[k - 1]) / dt
            } else {
                (x[k + 1] - x[k - 1]) / (2.0 * dt)
            }
        })
        .collect()
}

/// Least-squares gain, offset and small delay of `y` against `x`.
///
/// Falls back to [`fit_gain_offset`] with zero delay when `x` and its
/// derivative are collinear.
pub fn fit_delayed(x: &[f64], y: &[f64], dt: f64) -> DelayedFit {
    let n = x.len().min(y.len());
    let plain = fit_gain_offset(x, y);
    let fallback = DelayedFit {
        gain: plain.gain,
        offset: plain.offset,
        delay: 0.0,
    };
    if n < 3 {
        return fallback;
    }
    let dx = derivative(&x[..n], dt);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, md, my) = (mean(&x[..n]), mean(&dx), mean(&y[..n]));
    let (mut sxx, mut sxd, mut sdd, mut sxy, mut sdy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..n {
        let (a, b, c) = (x[k] - mx, dx[k] - md, y[k] - my);
        sxx += a * a;
        sxd += a * b;
        sdd += b * b;
        sxy += a * c;
        sdy += b * c;
    }
    let det = sxx * sdd - sxd * sxd;
    if det.is_nan() || det <= 1e-12 * sxx * sdd {
        return fallback;
    }
    let gain = (sxy * sdd - sdy * sxd) / det;
    let slope = (sdy * sxx - sxy * sxd) / det;
    if gain == 0.0 {
        return fallback;
    }
    DelayedFit {
        gain,
        offset: my - gain * mx - slope * md,
        delay: -slope / gain,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdrReport {
    /// `+inf` when no distortion power is measured.
    pub sdr_db: f64,
    pub fundamental_hz: f64,
    /// Amplitude of the fitted fundamental.
    pub fitted_gain: f64,
    /// Mean of the fitted segment.
    pub fitted_offset: f64,
    pub analysis_band_hz: f64,
    /// Whole cycles analysed.
    pub cycles: usize,
}

impl SdrReport {
    pub fn is_infinite(&self) -> bool {
        self.sdr_db.is_infinite()
    }

    pub const CSV_HEADER: &'static str =
        "sdr_db,fundamental_hz,fitted_gain,fitted_offset,analysis_band_hz,cycles";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.sdr_db,
            self.fundamental_hz,
            self.fitted_gain,
            self.fitted_offset,
            self.analysis_band_hz,
            self.cycles
        )
    }
}

impl fmt::Display for SdrReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            writeln!(f, "SDR            : inf (no in-band distortion)")?;
        } else {
            writeln!(f, "SDR            : {:.2} dB", self.sdr_db)?;
        }
        writeln!(f, "fundamental    : {} Hz", self.fundamental_hz)?;
        writeln!(f, "analysis band  : {} Hz", self.analysis_band_hz)?;
        writeln!(f, "cycles         : {}", self.cycles)?;
        writeln!(f, "fitted gain    : {}", self.fitted_gain)?;
        write!(f, "fitted offset  : {}", self.fitted_offset)
    }
}

/// Signal-to-distortion ratio of a reconstruction around `fundamental`.
///
/// After dropping the first `skip` seconds, the segment is cut to a whole
/// number of fundamental cycles. A gain and offset are fitted against a
/// unit sinusoid at the fundamental and divided out, which makes the
/// measure invariant to scaling and offset. The normalized segment is
/// Hann-windowed. Signal power is the fundamental bin ±1. Distortion is
/// every other bin from 2 up to `band_hz`.
pub fn sdr(reconstruction: &Signal, fundamental: f64, band_hz: f64, skip: f64) -> Result<SdrReport> {
    ensure(fundamental > 0.0, || "fundamental must be positive".into())?;
    ensure(band_hz > fundamental, || {
        format!("band {band_hz} Hz must extend past the fundamental {fundamental} Hz")
    })?;
    let rate = reconstruction.sample_rate();
    ensure(band_hz < rate / 2.0, || {
        format!("band {band_hz} Hz exceeds Nyquist")
    })?;
    let tail = reconstruction.tail_from(skip);
    let per_cycle = rate / fundamental;
    let cycles = (tail.len() as f64 / per_cycle).floor() as usize;
    if cycles < MIN_SDR_CYCLES {
        return Err(Error::Analysis(format!(
            "segment after the {skip} s transient holds {cycles} cycles of {fundamental} Hz, need {MIN_SDR_CYCLES}"
        )));
    }
    let n = ((cycles as f64 * per_cycle).round() as usize).min(tail.len());
    let seg = &tail[..n];

    let (offset, a, b) = fit_sinusoid(seg, fundamental / rate);
    let gain = a.hypot(b);
    let scale = seg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(gain > 1e-12 * scale) {
        return Err(Error::Analysis("no fundamental component in the segment".into()));
    }

    let mut buf: Vec<Complex<f64>> = seg
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let w = 0.5 - 0.5 * (std::f64::consts::TAU * k as f64 / n as f64).cos();
            Complex::new(w * (v - offset) / gain, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let bin_hz = fundamental / cycles as f64;
    let top = ((band_hz / bin_hz).floor() as usize).min(n / 2);
    let power = |k: usize| buf[k].norm_sqr();
    let signal: f64 = (cycles - 1..=cycles + 1).map(power).sum();
    let distortion: f64 = (2..=top)
        .filter(|k| k.abs_diff(cycles) > 1)
        .map(power)
        .sum();
    let sdr_db = if distortion > 0.0 {
        10.0 * (signal / distortion).log10()
    } else {
        f64::INFINITY
    };
    Ok(SdrReport {
        sdr_db,
        fundamental_hz: fundamental,
        fitted_gain: gain,
        fitted_offset: offset,
        analysis_band_hz: band_hz,
        cycles,
    })
}

/// [`sdr`] with the default band of 25× the fundamental.
pub fn sdr_default_band(reconstruction: &Signal, fundamental: f64, skip: f64) -> Result<SdrReport> {
    sdr(reconstruction, fundamental, DEFAULT_BAND_MULTIPLE * fundamental, skip)
}

/// Least-squares `c + a·sin(ωk) + b·cos(ωk)` with ω in cycles per sample.
///
/// Over whole cycles the three regressors are orthogonal up to rounding;
/// the 3×3 normal equations are still solved to stay exact on segments
/// that are a fraction of a sample off.
fn fit_sinusoid(seg: &[f64], cycles_per_sample: f64) -> (f64, f64, f64) {
    let w = std::f64::consts::TAU * cycles_per_sample;
    let mut m = [[0.0f64; 3]; 3];
    let mut r = [0.0f64; 3];
    for (k, &y) in seg.iter().enumerate() {
        let (s, c) = (w * k as f64).sin_cos();
        let basis = [1.0, s, c];
        for i in 0..3 {
            r[i] += basis[i] * y;
            for j in 0..3 {
                m[i][j] += basis[i] * basis[j];
            }
        }
    }
    let sol = solve3(m, r);
    (sol[0], sol[1], sol[2])
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap_or(col);
        m.swap(col, pivot);
        r.swap(col, pivot);
        let d = m[col][col];
        if d == 0.0 {
            continue;
        }
        for row in col + 1..3 {
            let f = m[row][col] / d;
            for j in col..3 {
                m[row][j] -= f * m[col][j];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let acc: f64 = (i + 1..3).map(|j| m[i][j] * x[j]).sum();
        x[i] = if m[i][i] != 0.0 { (r[i] - acc) / m[i][i] } else { 0.0 };
    }
    x
}

/// Spikes per second inside the half-open window `[start, end)`.
pub fn firing_rate(train: &SpikeTrain, window: (f64, f64)) -> Result<f64> {
    let (start, end) = window;
    ensure(end > start, || format!("empty window [{start}, {end})"))?;
    ensure(start >= 0.0 && end <= train.duration * (1.0 + 1e-12), || {
        format!(
            "window [{start}, {end}) outside the train's [0, {}]",
            train.duration
        )
    })?;
    let count = train
        .times()
        .iter()
        .filter(|&&t| t >= start && t < end)
        .count();
    Ok(count as f64 / (end - start))
}

/// Mean inter-spike interval of the spikes at or after `from`.
pub fn mean_isi(train: &SpikeTrain, from: f64) -> Option<f64> {
    let times: Vec<f64> = train.times().iter().copied().filter(|&t| t >= from).collect();
    (times.len() >= 2).then(|| (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64)
}

/// Coefficient of variation of the inter-spike intervals after `from`.
pub fn isi_cv(train: &SpikeTrain, from: f64) -> Option<f64> {
    let times: Vec<f64> = train.times().iter().copied().filter(|&t| t >= from).collect();
    if times.len() < 3 {
        return None;
    }
    let isi: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = isi.iter().sum::<f64>() / isi.len() as f64;
    let var = isi.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / isi.len() as f64;
    Some(var.sqrt() / mean)
}

/// Total energy divided by the number of spikes implied by a firing rate
/// held over the simulation time.
pub fn energy_per_spike(total_energy: f64, rate_hz: f64, sim_time: f64) -> Result<f64> {
    let spikes = rate_hz * sim_time;
    if !(spikes >= 1.0) {
        return Err(Error::UndefinedEnergy(spikes));
    }
    Ok(total_energy / spikes)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub total_energy: f64,
    pub spike_count: usize,
    pub duration: f64,
    /// `None` for a silent train.
    pub energy_per_spike: Option<f64>,
}

/// Parametric energy proxy: a static power drain plus a fixed cost per
/// spike. The constants are labelled placeholders, not circuit figures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyProxy {
    pub static_w: f64,
    pub spike_j: f64,
}

impl EnergyProxy {
    /// Comparator that sinks current while the membrane ramps: dominated
    /// by static drain.
    pub const ADEX: EnergyProxy = EnergyProxy {
        static_w: 5e-9,
        spike_j: 10e-12,
    };
    /// Starved comparator with regenerative reset: energy moves in steps,
    /// once per spike.
    pub const SIGMA_DELTA: EnergyProxy = EnergyProxy {
        static_w: 10e-12,
        spike_j: 10e-12,
    };

    pub fn report(&self, train: &SpikeTrain, duration: f64) -> Result<EnergyReport> {
        energy_model(train, self.static_w, self.spike_j, duration)
    }

    /// Cumulative energy at each of `times`.
    pub fn cumulative(&self, train: &SpikeTrain, times: &[f64]) -> Vec<f64> {
        let mut k = 0;
        times
            .iter()
            .map(|&t| {
                while k < train.len() && train.times()[k] <= t {
                    k += 1;
                }
                self.static_w * t + self.spike_j * k as f64
            })
            .collect()
    }
}

/// `total = static power · duration + cost per spike · spike count`.
pub fn energy_model(
    train: &SpikeTrain,
    static_w: f64,
    spike_j: f64,
    duration: f64,
) -> Result<EnergyReport> {
    ensure(static_w >= 0.0 && spike_j >= 0.0, || {
        "energy constants must be non-negative".into()
    })?;
    ensure(duration >= 0.0, || "duration must be non-negative".into())?;
    let spike_count = train.len();
    let total_energy = static_w * duration + spike_j * spike_count as f64;
    Ok(EnergyReport {
        total_energy,
        spike_count,
        duration,
        energy_per_spike: (spike_count > 0).then(|| total_energy / spike_count as f64),
    })
}

/// RMS of `a - b` divided by the standard deviation of `b`.
pub fn nrmse(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let mean = b[..n].iter().sum::<f64>() / n as f64;
    let var = b[..n].iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let mse = a[..n]
        .iter()
        .zip(&b[..n])
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        / n as f64;
    (mse / var).sqrt()
}
