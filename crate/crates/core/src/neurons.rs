//! Spiking encoders: the sigma-delta neuron, its feedback-free LIF limit and
//! the adaptive exponential (ADEX) neuron.
//!
//! Both models are a first-order loop. The input minus the feedback current
//! `s` is low-pass filtered into `i_mem`. When `i_mem` crosses the threshold
//! the neuron spikes, `i_mem` is reset and a feedback pulse is integrated
//! into `s`. The sigma-delta neuron stretches that pulse to `pulse_width`.
//! The ADEX neuron kicks `s` with a pulse one step wide.

use crate::error::{ensure, Result};
use crate::filters::{DiscreteLowPass, FilterParams};

/// Result of advancing an encoder by one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub spiked: bool,
    /// Fraction of the step, in `[0, 1]`, at which the threshold was crossed.
    /// Always 0 for grid-locked models.
    pub spike_offset: f64,
    /// Feedback pulse level emitted during this step, nA.
    pub pulse_level: f64,
}

impl StepOutput {
    const QUIET: StepOutput = StepOutput {
        spiked: false,
        spike_offset: 0.0,
        pulse_level: 0.0,
    };
}

/// A neuron advanced on a fixed time grid.
pub trait Encoder {
    fn step(&mut self, input: f64) -> StepOutput;
    /// Output of the error (membrane) filter, nA.
    fn i_mem(&self) -> f64;
    /// Feedback current, nA.
    fn feedback(&self) -> f64;
    fn dt(&self) -> f64;
    /// Width of the feedback pulse rendered for each spike, seconds.
    fn pulse_width(&self) -> f64;
    fn pulse_amplitude(&self) -> f64;
}

// ---------------------------------------------------------------------------
// Sigma-delta neuron

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdNeuronParams {
    /// Error filter E(s) applied to `i - s`.
    pub err_filter: FilterParams,
    /// Feedback filter H(s) driven by the extended pulse.
    pub fb_filter: FilterParams,
    /// Comparator threshold, nA.
    pub threshold: f64,
    /// Feedback pulse width, seconds.
    pub pulse_width: f64,
    /// Feedback pulse height, nA.
    pub pulse_amplitude: f64,
    /// Comparator-input reset value, nA.
    pub reset: f64,
}

impl Default for SdNeuronParams {
    fn default() -> Self {
        Self {
            err_filter: FilterParams {
                gain: 1.0,
                tau: 2e-3,
            },
            fb_filter: FilterParams {
                gain: 1.0,
                tau: 10e-3,
            },
            threshold: 1.0,
            pulse_width: 100e-6,
            pulse_amplitude: 100.0,
            reset: 0.0,
        }
    }
}

impl SdNeuronParams {
    pub fn validate(&self, dt: f64) -> Result<()> {
        ensure(dt.is_finite() && dt > 0.0, || {
            format!("time step must be positive, got {dt}")
        })?;
        self.err_filter.validate()?;
        self.fb_filter.validate()?;
        ensure(self.threshold > 0.0, || {
            format!("threshold must be positive, got {}", self.threshold)
        })?;
        ensure(self.pulse_width >= dt * (1.0 - 1e-9), || {
            format!(
                "pulse width {} s is shorter than the time step {dt} s",
                self.pulse_width
            )
        })?;
        ensure(self.pulse_amplitude >= 0.0, || {
            format!(
                "pulse amplitude must be non-negative, got {}",
                self.pulse_amplitude
            )
        })?;
        ensure(self.reset < self.threshold, || {
            "reset value must lie below the threshold".into()
        })
    }

    /// The same neuron with the feedback filter disabled (LIF mode).
    pub fn lif(&self) -> Self {
        self.with_fb_gain(0.0)
    }

    pub fn with_fb_gain(&self, gain: f64) -> Self {
        Self {
            fb_filter: self.fb_filter.with_gain(gain),
            ..*self
        }
    }

    /// A one-step feedback pulse whose filter gain is raised by
    /// `pulse_width / dt`, so each spike injects the same charge as the
    /// extended pulse would.
    pub fn narrow_pulse(&self, dt: f64) -> Self {
        let factor = self.pulse_width / dt;
        Self {
            pulse_width: dt,
            fb_filter: self.fb_filter.with_gain(self.fb_filter.gain * factor),
            ..*self
        }
    }

    /// Scales every current-valued parameter by `factor`.
    ///
    /// The loop is linear in current, so a neuron scaled by `k` driven by
    /// `k·i` spikes at exactly the times the original does for `i`.
    pub fn scale_currents(&self, factor: f64) -> Self {
        Self {
            threshold: self.threshold * factor,
            pulse_amplitude: self.pulse_amplitude * factor,
            reset: self.reset * factor,
            ..*self
        }
    }

    /// Defaults rescaled for pA-level inputs (threshold 1 pA, pulse 100 pA).
    pub fn pico() -> Self {
        Self::default().scale_currents(1e-3)
    }

    /// Largest mean feedback current the loop can produce, reached when the
    /// pulse is held on permanently.
    pub fn full_scale(&self) -> f64 {
        self.fb_filter.gain * self.pulse_amplitude
    }

    /// Quasi-static estimate of the mean feedback current for a DC input.
    ///
    /// Treats the error `e = i - <s>` as constant over an inter-spike
    /// interval. The membrane filter then climbs from `reset` to the
    /// threshold in `τ·ln((g·e - reset)/(g·e - δ))`, and charge balance
    /// closes the loop: `<s> = g_fb·A·min(1, T_p/ISI)`. The error is solved
    /// by bisection. The loop's DC gain is `i / <s>`.
    pub fn mean_feedback_estimate(&self, input: f64) -> f64 {
        let g_e = self.err_filter.gain;
        let reach = self.threshold / g_e;
        if input <= reach || g_e == 0.0 {
            return 0.0;
        }
        let feedback = |e: f64| -> f64 {
            let drive = g_e * e;
            if drive <= self.threshold {
                return 0.0;
            }
            let isi =
                self.err_filter.tau * ((drive - self.reset) / (drive - self.threshold)).ln();
            self.full_scale() * (self.pulse_width / isi).min(1.0)
        };
        // f(e) = e + <s>(e) - i is increasing on (reach, i].
        let (mut lo, mut hi) = (reach, input);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid + feedback(mid) > input {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        feedback(0.5 * (lo + hi))
    }
}

/// Loop variables of the sigma-delta neuron.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SdNeuronState {
    pub i_mem: f64,
    pub s: f64,
    /// Steps left on the extended pulse, including the current one.
    pub pulse_steps_left: u32,
}

impl SdNeuronState {
    pub fn pulse_remaining(&self, dt: f64) -> f64 {
        self.pulse_steps_left as f64 * dt
    }
}

/// A sigma-delta neuron bound to a time step.
#[derive(Debug, Clone)]
pub struct SdNeuron {
    params: SdNeuronParams,
    dt: f64,
    err: DiscreteLowPass,
    fb: DiscreteLowPass,
    pulse_steps: u32,
    pub state: SdNeuronState,
}

impl SdNeuron {
    pub fn new(params: SdNeuronParams, dt: f64) -> Result<Self> {
        params.validate(dt)?;
        Ok(Self {
            params,
            dt,
            err: params.err_filter.discretize(dt),
            fb: params.fb_filter.discretize(dt),
            pulse_steps: pulse_steps(params.pulse_width, dt),
            state: SdNeuronState::default(),
        })
    }

    pub fn params(&self) -> &SdNeuronParams {
        &self.params
    }

    /// Runs the neuron on a constant input for `steps` steps.
    pub fn settle(&mut self, input: f64, steps: usize) {
        for _ in 0..steps {
            self.step(input);
        }
    }
}

fn pulse_steps(width: f64, dt: f64) -> u32 {
    ((width / dt) - 1e-9).ceil().max(1.0) as u32
}

impl Encoder for SdNeuron {
    #[inline]
    fn step(&mut self, input: f64) -> StepOutput {
        let st = &mut self.state;
        let error = input - st.s;
        st.i_mem = self.err.step(st.i_mem, error);
        let spiked = st.i_mem > self.params.threshold;
        if spiked {
            st.i_mem = self.params.reset;
            st.pulse_steps_left = self.pulse_steps;
        }
        let pulse_level = if st.pulse_steps_left > 0 {
            st.pulse_steps_left -= 1;
            self.params.pulse_amplitude
        } else {
            0.0
        };
        st.s = self.fb.step(st.s, pulse_level);
        StepOutput {
            spiked,
            spike_offset: 0.0,
            pulse_level,
        }
    }

    fn i_mem(&self) -> f64 {
        self.state.i_mem
    }

    fn feedback(&self) -> f64 {
        self.state.s
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn pulse_width(&self) -> f64 {
        self.pulse_steps as f64 * self.dt
    }

    fn pulse_amplitude(&self) -> f64 {
        self.params.pulse_amplitude
    }
}

/// One sigma-delta step as a pure function of the state.
pub fn sd_step(
    state: SdNeuronState,
    input: f64,
    dt: f64,
    params: &SdNeuronParams,
) -> Result<(SdNeuronState, StepOutput)> {
    let mut n = SdNeuron::new(*params, dt)?;
    n.state = state;
    let out = n.step(input);
    Ok((n.state, out))
}

/// Firing rate of the feedback-free neuron for a DC input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifRate {
    pub rate_hz: f64,
    pub spike_count: usize,
    /// Set when fewer than two spikes fit in the simulated window, so no
    /// inter-spike interval was observed and the rate is reported as 0.
    pub too_short: bool,
}

pub fn lif_rate(input: f64, duration: f64, params: &SdNeuronParams, dt: f64) -> Result<LifRate> {
    ensure(input >= 0.0, || format!("DC input must be non-negative, got {input}"))?;
    ensure(duration > 0.0, || format!("duration must be positive, got {duration}"))?;
    let mut n = SdNeuron::new(params.lif(), dt)?;
    let steps = (duration / dt).round() as usize;
    let spike_count = (0..steps).filter(|_| n.step(input).spiked).count();
    if spike_count < 2 {
        return Ok(LifRate {
            rate_hz: 0.0,
            spike_count,
            too_short: input > 0.0,
        });
    }
    Ok(LifRate {
        rate_hz: spike_count as f64 / (steps as f64 * dt),
        spike_count,
        too_short: false,
    })
}

// ---------------------------------------------------------------------------
// ADEX neuron

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdexParams {
    pub alpha_l: f64,
    /// Leak reversal, nA.
    pub i_leak: f64,
    /// Slope factor of the exponential term, nA.
    pub slope: f64,
    /// Spike threshold, nA.
    pub threshold: f64,
    pub tau_mem: f64,
    /// Adaptation coupling.
    pub alpha_s: f64,
    pub tau_w: f64,
    pub reset: f64,
    /// Gain of the feedback kick.
    pub fb_gain: f64,
    /// Height of the narrow feedback pulse, nA.
    pub pulse_amplitude: f64,
    /// Width of the narrow feedback pulse, seconds.
    pub kick_width: f64,
}

impl Default for AdexParams {
    fn default() -> Self {
        Self {
            alpha_l: 1.0,
            i_leak: 0.0,
            slope: 0.1,
            threshold: 1.0,
            tau_mem: 2e-3,
            alpha_s: 0.01,
            tau_w: 10e-3,
            reset: 0.0,
            fb_gain: 1.0,
            pulse_amplitude: 100.0,
            kick_width: 1e-6,
        }
    }
}

impl AdexParams {
    pub fn validate(&self, dt: f64) -> Result<()> {
        ensure(dt.is_finite() && dt > 0.0, || {
            format!("time step must be positive, got {dt}")
        })?;
        ensure(self.tau_mem > 0.0 && self.tau_w > 0.0, || {
            "time constants must be positive".into()
        })?;
        ensure(self.slope > 0.0, || {
            format!("slope factor must be positive, got {}", self.slope)
        })?;
        ensure(self.threshold > self.i_leak, || {
            "threshold must exceed the leak reversal".into()
        })?;
        ensure(dt <= self.tau_mem / 10.0, || {
            format!(
                "time step {dt} s too coarse for tau_mem {} s (need dt <= tau_mem/10)",
                self.tau_mem
            )
        })?;
        ensure(self.kick_width >= 0.0, || "kick width must be non-negative".into())
    }

    /// Cap on `i_mem` inside the exponential term.
    pub fn clamp_max(&self) -> f64 {
        self.threshold + 10.0 * self.slope
    }

    /// Increment of `s` caused by one spike.
    pub fn kick(&self) -> f64 {
        self.fb_gain * self.pulse_amplitude * -(-self.kick_width / self.tau_w).exp_m1()
    }

    fn membrane_rate(&self, i_mem: f64, s: f64, input: f64) -> f64 {
        let arg = (i_mem.min(self.clamp_max()) - self.threshold) / self.slope;
        (-self.alpha_l * (i_mem - self.i_leak) + self.alpha_l * self.slope * arg.exp() - s
            + input)
            / self.tau_mem
    }

    fn adaptation_rate(&self, i_mem: f64, s: f64) -> f64 {
        (self.alpha_s * (i_mem - self.i_leak) - s) / self.tau_w
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AdexState {
    pub i_mem: f64,
    pub s: f64,
}

/// Forward-Euler ADEX step.
///
/// A threshold crossing is located by linear interpolation inside the
/// step. The neuron is reset and kicked at that instant and the rest of
/// the step is integrated from the reset state, so spike timing is not
/// quantized to the grid. Returns the crossing offset as a fraction of
/// `dt`.
pub fn adex_step(state: AdexState, input: f64, dt: f64, p: &AdexParams) -> (AdexState, Option<f64>) {
    let AdexState { i_mem, s } = state;
    let di = p.membrane_rate(i_mem, s, input);
    let ds = p.adaptation_rate(i_mem, s);
    let i_next = i_mem + dt * di;
    if i_next <= p.threshold {
        return (
            AdexState {
                i_mem: i_next,
                s: s + dt * ds,
            },
            None,
        );
    }
    let theta = if i_mem >= p.threshold {
        0.0
    } else {
        ((p.threshold - i_mem) / (i_next - i_mem)).clamp(0.0, 1.0)
    };
    let s_cross = s + theta * dt * ds + p.kick();
    let rest = (1.0 - theta) * dt;
    let i_after = p.reset + rest * p.membrane_rate(p.reset, s_cross, input);
    let s_after = s_cross + rest * p.adaptation_rate(p.reset, s_cross);
    (
        AdexState {
            i_mem: i_after,
            s: s_after,
        },
        Some(theta),
    )
}

/// An ADEX neuron bound to a time step.
#[derive(Debug, Clone)]
pub struct AdexNeuron {
    params: AdexParams,
    dt: f64,
    pub state: AdexState,
}

impl AdexNeuron {
    pub fn new(params: AdexParams, dt: f64) -> Result<Self> {
        params.validate(dt)?;
        Ok(Self {
            params,
            dt,
            state: AdexState {
                i_mem: params.i_leak,
                s: 0.0,
            },
        })
    }

    pub fn params(&self) -> &AdexParams {
        &self.params
    }
}

impl Encoder for AdexNeuron {
    fn step(&mut self, input: f64) -> StepOutput {
        let (next, crossing) = adex_step(self.state, input, self.dt, &self.params);
        self.state = next;
        match crossing {
            Some(theta) => StepOutput {
                spiked: true,
                spike_offset: theta,
                pulse_level: self.params.pulse_amplitude,
            },
            None => StepOutput::QUIET,
        }
    }

    fn i_mem(&self) -> f64 {
        self.state.i_mem
    }

    fn feedback(&self) -> f64 {
        self.state.s
    }

    fn dt(&self) -> f64 {
        self.dt
    }

    fn pulse_width(&self) -> f64 {
        self.dt
    }

    fn pulse_amplitude(&self) -> f64 {
        self.params.pulse_amplitude
    }
}
